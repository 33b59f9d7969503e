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

#include "slotprop/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "slotprop/rng.hpp"
#include "slotprop/tensor_io.hpp"

namespace slotprop {

namespace fs = std::filesystem;
using nlohmann::json;

std::int64_t snippet_count(std::int64_t frame_count, std::int64_t snippet_interval) {
  if (frame_count < 1 || snippet_interval < 1) {
    throw InvalidArgument("snippet_count requires frame_count >= 1 and sigma >= 1");
  }
  return (frame_count + snippet_interval - 1) / snippet_interval;
}

SnippetFeatureSequence load_feature_sequence(const fs::path& path, int expected_length, int expected_channels,
                                             SnippetGrid grid) {
  SnippetFeatureSequence seq;
  seq.features = read_feature_file(path);
  if (seq.features.rows() < 1) throw FormatError(path.string() + ": feature file has no snippets");
  if (expected_length > 0 && seq.length() != expected_length) {
    throw FormatError(path.string() + ": expected L=" + std::to_string(expected_length) + ", file has " +
                      std::to_string(seq.length()));
  }
  if (expected_channels > 0 && seq.channels() != expected_channels) {
    throw FormatError(path.string() + ": expected C=" + std::to_string(expected_channels) + ", file has " +
                      std::to_string(seq.channels()));
  }
  seq.snippet_interval = grid.snippet_interval;
  seq.time_per_snippet = grid.time_per_snippet;
  seq.origin_offset = 0;
  seq.valid_length = seq.length();
  return seq;
}

void store_feature_sequence(const fs::path& path, const SnippetFeatureSequence& seq) {
  write_feature_file(path, seq.features);
}

std::vector<SnippetFeatureSequence> window_sequence(const SnippetFeatureSequence& seq, int window_length,
                                                    int stride) {
  if (window_length < 1 || stride < 1) throw InvalidArgument("window_length and stride must be >= 1");
  // Larger strides would leave snippets outside every window.
  if (stride > window_length) throw InvalidArgument("window stride must not exceed the window length");
  const int length = seq.valid_length;
  auto make_window = [&](int offset) {
    SnippetFeatureSequence w;
    w.snippet_interval = seq.snippet_interval;
    w.time_per_snippet = seq.time_per_snippet;
    w.origin_offset = seq.origin_offset + offset;
    w.features = Mat::Zero(window_length, seq.channels());
    const int take = std::min(window_length, length - offset);
    w.features.topRows(take) = seq.features.middleRows(offset, take);
    w.valid_length = take;
    return w;
  };

  std::vector<SnippetFeatureSequence> windows;
  if (length <= window_length) {
    windows.push_back(make_window(0));
    return windows;
  }
  int offset = 0;
  for (; offset + window_length <= length; offset += stride) windows.push_back(make_window(offset));
  const int last_end = windows.back().origin_offset - seq.origin_offset + window_length;
  if (last_end < length) windows.push_back(make_window(length - window_length));
  return windows;
}

SnippetFeatureSequence rescale_sequence(const SnippetFeatureSequence& seq, int target_length) {
  if (target_length < 1) throw InvalidArgument("target_length must be >= 1");
  const int length = seq.valid_length;
  if (length < 1) throw InvalidArgument("rescale_sequence requires at least one snippet");
  SnippetFeatureSequence out;
  out.snippet_interval = seq.snippet_interval;
  out.origin_offset = 0;
  out.time_per_snippet = seq.time_per_snippet * length / target_length;
  out.valid_length = target_length;
  out.features.resize(target_length, seq.channels());
  for (int k = 0; k < target_length; ++k) {
    const double x = target_length == 1 ? 0.0 : static_cast<double>(k) * (length - 1) / (target_length - 1);
    const int lo = std::min(static_cast<int>(std::floor(x)), length - 1);
    const int hi = std::min(lo + 1, length - 1);
    const double frac = x - lo;
    if (frac == 0.0 || lo == hi) {
      out.features.row(k) = seq.features.row(lo);
    } else {
      out.features.row(k) = seq.features.row(lo) + frac * (seq.features.row(hi) - seq.features.row(lo));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

AnnotationSet read_annotations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError(path.string() + ": annotation file must be a JSON object");
  AnnotationSet out;
  try {
    for (const auto& [id, entry] : doc.items()) {
      VideoRecord rec;
      rec.id = id;
      rec.duration = entry.at("duration").get<double>();
      rec.fps = entry.value("fps", 0.0);
      rec.frame_count = rec.fps > 0 ? static_cast<std::int64_t>(std::llround(rec.duration * rec.fps)) : 0;
      for (const auto& ann : entry.value("annotations", json::array())) {
        const auto& seg = ann.at("segment");
        GroundTruthInstance inst;
        inst.t_start = seg.at(0).get<double>();
        inst.t_end = seg.at(1).get<double>();
        if (ann.contains("label")) inst.label = ann.at("label").get<std::string>();
        if (!(inst.t_start < inst.t_end)) {
          throw FormatError(path.string() + ": video " + id + " has a segment with start >= end");
        }
        rec.instances.push_back(std::move(inst));
      }
      out.emplace(id, std::move(rec));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

void write_annotations(const fs::path& path, const AnnotationSet& annotations) {
  json doc = json::object();
  for (const auto& [id, rec] : annotations) {
    json anns = json::array();
    for (const auto& inst : rec.instances) {
      json a = {{"segment", {inst.t_start, inst.t_end}}};
      if (!inst.label.empty()) a["label"] = inst.label;
      anns.push_back(std::move(a));
    }
    doc[id] = {{"duration", rec.duration}, {"fps", rec.fps}, {"annotations", std::move(anns)}};
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(1) << '\n';
}

std::vector<ManifestLine> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::vector<ManifestLine> lines;
  try {
    const json doc = json::parse(in);
    if (!doc.is_array()) throw FormatError(path.string() + ": manifest must be a JSON list");
    for (const auto& item : doc) {
      lines.push_back({item.at("video_id").get<std::string>(), item.at("feature_path").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return lines;
}

void write_manifest(const fs::path& path, const std::vector<ManifestLine>& lines) {
  json doc = json::array();
  for (const auto& line : lines) doc.push_back({{"video_id", line.video_id}, {"feature_path", line.feature_path}});
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(1) << '\n';
}

DatasetManifest load_dataset(const fs::path& manifest_path, const fs::path& annotations_path, SequenceMode mode) {
  const auto lines = read_manifest(manifest_path);
  const auto annotations = read_annotations(annotations_path);
  const fs::path base = manifest_path.parent_path();

  DatasetManifest manifest;
  manifest.mode = mode;
  std::ostringstream missing;
  int n_missing = 0;
  for (const auto& line : lines) {
    const auto it = annotations.find(line.video_id);
    if (it == annotations.end()) {
      throw FormatError("video " + line.video_id + " is in the manifest but not in " + annotations_path.string());
    }
    fs::path feature = line.feature_path;
    if (feature.is_relative()) feature = base / feature;
    if (!fs::exists(feature)) {
      missing << "\n  " << line.video_id << ": " << feature.string();
      ++n_missing;
    }
    manifest.entries.push_back({it->second, feature});
  }
  if (n_missing > 0) {
    throw IoError(std::to_string(n_missing) + " feature file(s) missing:" + missing.str());
  }
  return manifest;
}

// ---------------------------------------------------------------------------

namespace {

// Membership ramp centred on a boundary: 0.25 / 0.75 on the two snippets that
// straddle it with the default two-snippet cross-fade.
double ramp(double signed_distance) {
  return std::clamp(0.5 + signed_distance / kCrossFadeSnippets, 0.0, 1.0);
}

Eigen::RowVectorXd class_pattern(const SynthSpec& spec, int cls) {
  Rng rng(derive_seed(spec.pattern_seed, "synth/class", static_cast<std::uint64_t>(cls)));
  std::bernoulli_distribution coin(0.5);
  Eigen::RowVectorXd p(spec.channels);
  for (int c = 0; c < spec.channels; ++c) p(c) = coin(rng) ? 1.0 : -1.0;
  return p;
}

}  // namespace

SyntheticVideo generate_synthetic_video(const SynthSpec& spec, int index) {
  const int margin = kCrossFadeSnippets;
  const int max_seg = spec.max_segment > 0 ? spec.max_segment : std::max(spec.min_segment, spec.length / 4);
  if (spec.length < 2 * margin + spec.min_segment) {
    throw InvalidArgument("synthetic length " + std::to_string(spec.length) + " too small to place a segment");
  }

  Rng rng(derive_seed(spec.seed, "synth/video", static_cast<std::uint64_t>(index)));
  std::uniform_int_distribution<int> n_dist(1, spec.max_instances);
  std::uniform_int_distribution<int> cls_dist(0, spec.n_classes - 1);
  const int wanted = n_dist(rng);

  std::vector<std::pair<int, int>> segments;
  std::vector<int> classes;
  for (int k = 0; k < wanted; ++k) {
    const int hi_len = std::min(max_seg, spec.length - 2 * margin);
    std::uniform_int_distribution<int> len_dist(spec.min_segment, std::max(spec.min_segment, hi_len));
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      const int len = len_dist(rng);
      const int last_start = spec.length - margin - len;
      if (last_start < margin) continue;
      std::uniform_int_distribution<int> start_dist(margin, last_start);
      const int start = start_dist(rng);
      const int end = start + len;
      const bool clear = std::none_of(segments.begin(), segments.end(), [&](const auto& s) {
        return start < s.second + kCrossFadeSnippets && s.first < end + kCrossFadeSnippets;
      });
      if (clear) {
        segments.emplace_back(start, end);
        classes.push_back(cls_dist(rng));
        placed = true;
      }
    }
    if (!placed && segments.empty()) {
      throw InvalidArgument("could not place any segment in a sequence of length " + std::to_string(spec.length));
    }
  }
  std::vector<std::size_t> order(segments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return segments[a] < segments[b]; });

  SyntheticVideo out;
  const double dt = spec.snippet_interval / spec.fps;
  char id[32];
  std::snprintf(id, sizeof id, "synth_%04d", index);
  out.record.id = id;
  out.record.fps = spec.fps;
  out.record.frame_count = static_cast<std::int64_t>(spec.length) * spec.snippet_interval;
  out.record.duration = spec.length * dt;

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::RowVectorXd background(spec.channels);
  for (int c = 0; c < spec.channels; ++c) background(c) = 0.5 * normal(rng);

  out.features.resize(spec.length, spec.channels);
  for (int l = 0; l < spec.length; ++l) {
    for (int c = 0; c < spec.channels; ++c) out.features(l, c) = background(c) + spec.noise * normal(rng);
  }
  for (auto i : order) {
    const auto [start, end] = segments[i];
    const Eigen::RowVectorXd shift = spec.action_offset * class_pattern(spec, classes[i]);
    for (int l = std::max(0, start - margin); l < std::min(spec.length, end + margin); ++l) {
      const double centre = l + 0.5;
      const double weight = std::min(ramp(centre - start), ramp(end - centre));
      out.features.row(l) += weight * shift;
    }
    out.segments.emplace_back(start, end);
    out.record.instances.push_back({start * dt, end * dt, "class_" + std::to_string(classes[i])});
  }
  // Stored features are float32; round here so in-memory and on-disk data agree.
  out.features = out.features.cast<float>().cast<double>();
  return out;
}

DatasetManifest generate_synthetic_dataset(const SynthSpec& spec, const fs::path& out_dir) {
  if (spec.n_videos < 1 || spec.length < 1 || spec.channels < 1 || spec.max_instances < 1 || spec.n_classes < 1 ||
      spec.min_segment < 1 || spec.snippet_interval < 1 || !(spec.fps > 0) || !(spec.noise >= 0)) {
    throw InvalidArgument("synthetic spec fields must be positive");
  }
  std::error_code ec;
  fs::create_directories(out_dir / "features", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "features").string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.mode = SequenceMode::kWindowed;
  AnnotationSet annotations;
  std::vector<ManifestLine> lines;
  for (int v = 0; v < spec.n_videos; ++v) {
    auto video = generate_synthetic_video(spec, v);
    const std::string rel = "features/" + video.record.id + ".prsf";
    write_feature_file(out_dir / rel, video.features);
    lines.push_back({video.record.id, rel});
    manifest.entries.push_back({video.record, out_dir / rel});
    annotations.emplace(video.record.id, std::move(video.record));
  }
  write_annotations(out_dir / "annotations.json", annotations);
  write_manifest(out_dir / "manifest.json", lines);
  return manifest;
}

}  // namespace slotprop
