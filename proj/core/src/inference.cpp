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

#include "slotprop/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "slotprop/interval.hpp"

namespace slotprop {

std::vector<int> boundary_candidates(const Vec& probs, CandidateRule rule) {
  const int n = static_cast<int>(probs.size());
  std::vector<int> out;
  if (n == 0) return out;
  const double half_max = 0.5 * probs.maxCoeff();
  // A lone snippet has no neighbours to peak over; only the level test applies.
  if (n == 1) {
    if (probs(0) > half_max) out.push_back(0);
    return out;
  }
  for (int l = 0; l < n; ++l) {
    bool peak = true;
    if (l > 0) peak = peak && probs(l - 1) < probs(l);
    if (l + 1 < n) peak = peak && probs(l) > probs(l + 1);
    const bool high = probs(l) > half_max;
    if (rule == CandidateRule::kOr ? (peak || high) : (peak && high)) out.push_back(l);
  }
  return out;
}

std::vector<Proposal> form_proposals(const std::vector<int>& starts, const std::vector<int>& ends,
                                     const BoundaryScores& scores, const ConfidenceMaps& maps, int max_duration,
                                     double time_per_snippet) {
  std::vector<Proposal> out;
  for (int s : starts) {
    for (int e : ends) {
      const int d = e - s;
      if (d <= 0 || d > max_duration || d > maps.cls.rows()) continue;
      Proposal p;
      p.start_index = s;
      p.end_index = e;
      p.t_start = s * time_per_snippet;
      p.t_end = e * time_per_snippet;
      p.p_boundary = scores.start(s) * scores.end(e);
      p.p_map = maps.cls(d - 1, s) * maps.com(d - 1, s);
      p.score = p.p_boundary * p.p_map;
      out.push_back(p);
    }
  }
  return out;
}

bool proposal_order(const Proposal& a, const Proposal& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.t_start != b.t_start) return a.t_start < b.t_start;
  return (a.t_end - a.t_start) < (b.t_end - b.t_start);
}

void sort_proposals(std::vector<Proposal>& proposals) {
  std::stable_sort(proposals.begin(), proposals.end(), proposal_order);
}

std::vector<Proposal> nms(std::vector<Proposal> proposals, double threshold) {
  sort_proposals(proposals);
  std::vector<Proposal> kept;
  std::vector<bool> removed(proposals.size(), false);
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (removed[i]) continue;
    kept.push_back(proposals[i]);
    for (std::size_t j = i + 1; j < proposals.size(); ++j) {
      if (!removed[j] &&
          tiou(proposals[i].t_start, proposals[i].t_end, proposals[j].t_start, proposals[j].t_end) > threshold) {
        removed[j] = true;
      }
    }
  }
  return kept;
}

std::vector<Proposal> soft_nms(std::vector<Proposal> proposals, const SoftNmsParams& params) {
  std::vector<Proposal> out;
  out.reserve(proposals.size());
  while (!proposals.empty()) {
    const auto best = std::min_element(proposals.begin(), proposals.end(), proposal_order);
    const Proposal top = *best;
    proposals.erase(best);
    out.push_back(top);
    std::vector<Proposal> rest;
    rest.reserve(proposals.size());
    for (auto& p : proposals) {
      const double iou = tiou(top.t_start, top.t_end, p.t_start, p.t_end);
      if (params.hard_threshold && iou > *params.hard_threshold) continue;
      if (params.decay == SoftNmsDecay::kGaussian) {
        p.score *= std::exp(-(iou * iou) / params.sigma);
      } else if (iou > params.linear_threshold) {
        p.score *= 1.0 - iou;
      }
      rest.push_back(p);
    }
    proposals = std::move(rest);
  }
  std::erase_if(out, [&](const Proposal& p) { return p.score < params.keep_threshold; });
  return out;
}

std::vector<Proposal> suppress(std::vector<Proposal> proposals, const SuppressionConfig& config) {
  switch (config.method) {
    case Suppression::kNms:
      return nms(std::move(proposals), config.nms_threshold);
    case Suppression::kSoftNms: {
      auto out = soft_nms(std::move(proposals), config.soft);
      sort_proposals(out);
      return out;
    }
    case Suppression::kNone:
      break;
  }
  sort_proposals(proposals);
  return proposals;
}

std::vector<Proposal> merge_windows(const std::vector<std::vector<Proposal>>& per_window,
                                    const std::vector<int>& window_offsets, double time_per_snippet,
                                    const SuppressionConfig& config) {
  if (per_window.size() != window_offsets.size()) throw InvalidArgument("one offset per window required");
  std::vector<Proposal> all;
  for (std::size_t w = 0; w < per_window.size(); ++w) {
    const int offset = window_offsets[w];
    for (Proposal p : per_window[w]) {
      p.start_index += offset;
      p.end_index += offset;
      p.t_start = p.start_index * time_per_snippet;
      p.t_end = p.end_index * time_per_snippet;
      all.push_back(p);
    }
  }
  return suppress(std::move(all), config);
}

void write_proposals(const std::filesystem::path& path, const ProposalFile& proposals) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [id, list] : proposals) {
    auto sorted = list;
    sort_proposals(sorted);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : sorted) {
      arr.push_back({{"segment", {p.t_start, p.t_end}},
                     {"score", p.score},
                     {"p_boundary", p.p_boundary},
                     {"p_map", p.p_map}});
    }
    doc[id] = std::move(arr);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(1) << '\n';
}

}  // namespace slotprop
