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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slotprop/common.hpp"
#include "slotprop/heads.hpp"

namespace slotprop {

struct Proposal {
  double t_start = 0.0;  // seconds
  double t_end = 0.0;
  int start_index = 0;  // snippet indices (absolute after merge_windows)
  int end_index = 0;
  double p_boundary = 0.0;  // p_w
  double p_map = 0.0;       // M_w
  double score = 0.0;       // S_w = p_w * M_w

  bool operator==(const Proposal&) const = default;
};

enum class CandidateRule { kOr, kAnd };

/// Indices that are strict local peaks (one-sided at the ends) and/or exceed
/// half of the sequence maximum, combined by `rule`.
std::vector<int> boundary_candidates(const Vec& probs, CandidateRule rule = CandidateRule::kOr);

/// All (start, end) pairs with 0 < end - start <= max_duration. Anchor maps are
/// read at (end - start - 1, start). Times use the snippet left edge.
std::vector<Proposal> form_proposals(const std::vector<int>& starts, const std::vector<int>& ends,
                                     const BoundaryScores& scores, const ConfidenceMaps& maps, int max_duration,
                                     double time_per_snippet);

/// Highest score first; ties broken by earlier start, then shorter duration.
bool proposal_order(const Proposal& a, const Proposal& b);
void sort_proposals(std::vector<Proposal>& proposals);

/// Greedy hard suppression: drops proposals with tIoU > threshold against a kept one.
std::vector<Proposal> nms(std::vector<Proposal> proposals, double threshold = 0.65);

enum class SoftNmsDecay { kGaussian, kLinear };

struct SoftNmsParams {
  double sigma = 0.5;            // Gaussian: score *= exp(-iou^2 / sigma)
  double keep_threshold = 0.001;
  std::optional<double> hard_threshold;  // drop outright when iou > this
  SoftNmsDecay decay = SoftNmsDecay::kGaussian;
  double linear_threshold = 0.0;  // Linear: score *= (1 - iou) when iou > this
};

/// Greedy score decay; proposals are returned in finalization order.
std::vector<Proposal> soft_nms(std::vector<Proposal> proposals, const SoftNmsParams& params = {});

enum class Suppression { kNone, kNms, kSoftNms };

struct SuppressionConfig {
  Suppression method = Suppression::kNms;
  double nms_threshold = 0.65;
  SoftNmsParams soft;
};

std::vector<Proposal> suppress(std::vector<Proposal> proposals, const SuppressionConfig& config);

/// Shifts window-local proposals by their window offsets (snippets) into video
/// time, concatenates them and suppresses jointly.
std::vector<Proposal> merge_windows(const std::vector<std::vector<Proposal>>& per_window,
                                    const std::vector<int>& window_offsets, double time_per_snippet,
                                    const SuppressionConfig& config);

using ProposalFile = std::map<std::string, std::vector<Proposal>>;

/// {video_id: [{"segment": [s, e], "score", "p_boundary", "p_map"}]}, each list
/// sorted by score descending.
void write_proposals(const std::filesystem::path& path, const ProposalFile& proposals);

}  // namespace slotprop
