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

#include <vector>

#include "slotprop/common.hpp"
#include "slotprop/data_model.hpp"
#include "slotprop/interval.hpp"

namespace slotprop {

struct BoundaryLabels {
  Vec start;  // G_s, length L
  Vec end;    // G_e, length L
};

/// D x L map indexed by (duration - 1, start snippet).
struct ProposalLabelMap {
  Mat iou;                                  // G_c
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> valid;  // D x L
};

/// Instances are in sequence-local seconds (time 0 is the left edge of snippet 0).
/// Each boundary region is [t - h, t + h] with h = max(duration / 10, time_per_snippet);
/// a snippet's label is the max over instances of the fraction of the snippet covered.
BoundaryLabels boundary_labels(const std::vector<GroundTruthInstance>& instances, int length,
                               double time_per_snippet);

/// Anchor (d, l) spans [l * dt, (l + d) * dt]; valid iff l + d <= valid_length.
/// `valid_length` < 0 means the full length.
ProposalLabelMap proposal_label_map(const std::vector<GroundTruthInstance>& instances, int max_duration,
                                    int length, double time_per_snippet, int valid_length = -1);

/// Shifts instances into the local time frame of a sequence starting at `origin_seconds`.
std::vector<GroundTruthInstance> to_local_time(const std::vector<GroundTruthInstance>& instances,
                                               double origin_seconds);

}  // namespace slotprop
