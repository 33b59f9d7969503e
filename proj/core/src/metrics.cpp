// Copyright 2026 The slotprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slotprop/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"

namespace slotprop {

double tiou(double a_start, double a_end, double b_start, double b_end) noexcept {
  if (!(a_end > a_start) || !(b_end > b_start)) return 0.0;
  const double inter = std::min(a_end, b_end) - std::max(a_start, b_start);
  if (inter <= 0.0) return 0.0;
  const double uni = std::max(a_end, b_end) - std::min(a_start, b_start);
  return inter / uni;
}

namespace {

std::vector<double> thresholds(int lo_pct, int hi_pct, int step_pct) {
  std::vector<double> out;
  for (int p = lo_pct; p <= hi_pct; p += step_pct) out.push_back(p / 100.0);
  return out;
}

}  // namespace

EvalConfig EvalConfig::thumos() {
  EvalConfig c;
  c.mode = EvalMode::kThumos;
  c.tiou_set = thresholds(50, 100, 5);
  c.an_values = {50, 100, 200, 500};
  c.map_tiou_set = {0.3, 0.4, 0.5, 0.6, 0.7};
  return c;
}

EvalConfig EvalConfig::anet() {
  EvalConfig c;
  c.mode = EvalMode::kAnet;
  c.tiou_set = thresholds(50, 95, 5);
  c.an_values = {1, 10, 50, 100};
  c.map_tiou_set = {0.5, 0.75, 0.95};
  return c;
}

double recall_at(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt, double tiou_threshold, int an,
                 bool video_weighted) {
  double recalled = 0.0, total = 0.0;
  double video_sum = 0.0;
  int videos = 0;
  static const std::vector<ScoredSegment> kNone;
  for (const auto& [id, instances] : gt) {
    if (instances.empty()) continue;
    const auto it = proposals.find(id);
    const auto& props = it == proposals.end() ? kNone : it->second;
    const std::size_t top = std::min(props.size(), static_cast<std::size_t>(std::max(an, 0)));
    int hits = 0;
    for (const auto& g : instances) {
      for (std::size_t k = 0; k < top; ++k) {
        if (tiou(props[k].t_start, props[k].t_end, g.t_start, g.t_end) >= tiou_threshold) {
          ++hits;
          break;
        }
      }
    }
    recalled += hits;
    total += static_cast<double>(instances.size());
    video_sum += static_cast<double>(hits) / static_cast<double>(instances.size());
    ++videos;
  }
  if (video_weighted) return videos > 0 ? video_sum / videos : 0.0;
  return total > 0 ? recalled / total : 0.0;
}

std::map<int, double> ar_at_an(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt,
                               const EvalConfig& config) {
  std::map<int, double> out;
  for (int an : config.an_values) {
    double sum = 0.0;
    for (double t : config.tiou_set) sum += recall_at(proposals, gt, t, an, config.video_weighted);
    out[an] = config.tiou_set.empty() ? 0.0 : sum / static_cast<double>(config.tiou_set.size());
  }
  return out;
}

std::vector<double> ar_curve(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt,
                             const EvalConfig& config, int max_an) {
  EvalConfig c = config;
  c.an_values.resize(static_cast<std::size_t>(max_an));
  std::iota(c.an_values.begin(), c.an_values.end(), 1);
  const auto ar = ar_at_an(proposals, gt, c);
  std::vector<double> curve;
  for (int an = 1; an <= max_an; ++an) curve.push_back(ar.at(an));
  return curve;
}

double auc_from_curve(const std::vector<double>& ar_by_an) {
  if (ar_by_an.size() < 2) return ar_by_an.empty() ? 0.0 : 100.0 * ar_by_an.front();
  double area = 0.0;
  for (std::size_t k = 1; k < ar_by_an.size(); ++k) area += 0.5 * (ar_by_an[k - 1] + ar_by_an[k]);
  return 100.0 * area / static_cast<double>(ar_by_an.size() - 1);
}

double auc_ar_an(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt, const EvalConfig& config) {
  return auc_from_curve(ar_curve(proposals, gt, config, 100));
}

double average_precision(const SegmentsByVideo& detections, const GroundTruthByVideo& gt, double tiou_threshold) {
  struct Det {
    const std::string* video;
    const ScoredSegment* seg;
  };
  std::vector<Det> dets;
  for (const auto& [id, list] : detections)
    for (const auto& s : list) dets.push_back({&id, &s});
  std::stable_sort(dets.begin(), dets.end(), [](const Det& a, const Det& b) { return a.seg->score > b.seg->score; });

  std::size_t n_gt = 0;
  std::map<std::string, std::vector<bool>> used;
  for (const auto& [id, list] : gt) {
    n_gt += list.size();
    used[id].assign(list.size(), false);
  }
  if (n_gt == 0) return 0.0;

  std::vector<double> precision, recall;
  double tp = 0.0, fp = 0.0;
  for (const auto& det : dets) {
    int best = -1;
    double best_iou = -1.0;
    const auto git = gt.find(*det.video);
    if (git != gt.end()) {
      auto& flags = used[*det.video];
      for (std::size_t g = 0; g < git->second.size(); ++g) {
        if (flags[g]) continue;
        const double iou = tiou(det.seg->t_start, det.seg->t_end, git->second[g].t_start, git->second[g].t_end);
        if (iou >= tiou_threshold && iou > best_iou) {
          best_iou = iou;
          best = static_cast<int>(g);
        }
      }
      if (best >= 0) flags[static_cast<std::size_t>(best)] = true;
    }
    (best >= 0 ? tp : fp) += 1.0;
    precision.push_back(tp / (tp + fp));
    recall.push_back(tp / static_cast<double>(n_gt));
  }
  // All-point interpolation: precision envelope integrated over recall steps.
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    const double envelope = *std::max_element(precision.begin() + static_cast<std::ptrdiff_t>(k), precision.end());
    ap += (recall[k] - prev_recall) * envelope;
    prev_recall = recall[k];
  }
  return ap;
}

std::map<double, double> detection_map(const SegmentsByVideo& detections, const GroundTruthByVideo& gt,
                                       const std::vector<double>& tiou_set) {
  std::set<std::string> classes;
  for (const auto& [id, list] : gt)
    for (const auto& g : list) classes.insert(g.label);
  for (const auto& [id, list] : detections)
    for (const auto& d : list) classes.insert(d.label);

  std::map<double, double> out;
  for (double t : tiou_set) {
    double sum = 0.0;
    for (const auto& cls : classes) {
      SegmentsByVideo cd;
      GroundTruthByVideo cg;
      for (const auto& [id, list] : detections)
        for (const auto& d : list)
          if (d.label == cls) cd[id].push_back(d);
      for (const auto& [id, list] : gt)
        for (const auto& g : list)
          if (g.label == cls) cg[id].push_back(g);
      sum += average_precision(cd, cg, t);
    }
    out[t] = classes.empty() ? 0.0 : sum / static_cast<double>(classes.size());
  }
  return out;
}

EvalResults evaluate(const SegmentsByVideo& proposals, const GroundTruthByVideo& gt, const EvalConfig& config) {
  EvalResults r;
  r.ar_at_an = ar_at_an(proposals, gt, config);
  r.curve = ar_curve(proposals, gt, config, 100);
  r.auc = auc_from_curve(r.curve);
  r.map = detection_map(proposals, gt, config.map_tiou_set);
  return r;
}

SegmentsByVideo read_segments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open proposal file: " + path.string());
  SegmentsByVideo out;
  try {
    const auto doc = nlohmann::json::parse(in);
    if (!doc.is_object()) throw FormatError(path.string() + ": proposal file must be a JSON object");
    for (const auto& [id, list] : doc.items()) {
      auto& dst = out[id];
      for (const auto& item : list) {
        ScoredSegment s;
        s.t_start = item.at("segment").at(0).get<double>();
        s.t_end = item.at("segment").at(1).get<double>();
        s.score = item.at("score").get<double>();
        if (item.contains("label")) s.label = item.at("label").get<std::string>();
        dst.push_back(std::move(s));
      }
      std::stable_sort(dst.begin(), dst.end(),
                       [](const ScoredSegment& a, const ScoredSegment& b) { return a.score > b.score; });
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

GroundTruthByVideo ground_truth_of(const AnnotationSet& annotations) {
  GroundTruthByVideo out;
  for (const auto& [id, rec] : annotations) out[id] = rec.instances;
  return out;
}

namespace {

std::string threshold_key(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

}  // namespace

void write_results(const std::filesystem::path& path, const EvalResults& results) {
  nlohmann::json doc;
  doc["ar_at_an"] = nlohmann::json::object();
  for (const auto& [an, ar] : results.ar_at_an) doc["ar_at_an"][std::to_string(an)] = ar;
  doc["auc"] = results.auc;
  doc["map"] = nlohmann::json::object();
  for (const auto& [t, m] : results.map) doc["map"][threshold_key(t)] = m;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(1) << '\n';
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<double>& curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "AN,AR\n";
  char buf[64];
  for (std::size_t k = 0; k < curve.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.10f\n", k + 1, curve[k]);
    out << buf;
  }
}

}  // namespace slotprop
