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

#include "slotprop/labels.hpp"

#include <algorithm>

namespace slotprop {

namespace {

double coverage(double lo, double hi, double region_lo, double region_hi) {
  const double inter = std::min(hi, region_hi) - std::max(lo, region_lo);
  return inter > 0.0 ? inter / (hi - lo) : 0.0;
}

}  // namespace

BoundaryLabels boundary_labels(const std::vector<GroundTruthInstance>& instances, int length,
                               double time_per_snippet) {
  if (length < 1 || !(time_per_snippet > 0)) throw InvalidArgument("boundary_labels needs L >= 1 and dt > 0");
  BoundaryLabels out{Vec::Zero(length), Vec::Zero(length)};
  for (const auto& inst : instances) {
    const double half = std::max((inst.t_end - inst.t_start) / 10.0, time_per_snippet);
    for (int l = 0; l < length; ++l) {
      const double lo = l * time_per_snippet;
      const double hi = (l + 1) * time_per_snippet;
      out.start(l) = std::max(out.start(l), coverage(lo, hi, inst.t_start - half, inst.t_start + half));
      out.end(l) = std::max(out.end(l), coverage(lo, hi, inst.t_end - half, inst.t_end + half));
    }
  }
  return out;
}

ProposalLabelMap proposal_label_map(const std::vector<GroundTruthInstance>& instances, int max_duration,
                                    int length, double time_per_snippet, int valid_length) {
  if (max_duration < 1 || length < 1) throw InvalidArgument("proposal_label_map needs D >= 1 and L >= 1");
  if (valid_length < 0) valid_length = length;
  ProposalLabelMap out;
  out.iou = Mat::Zero(max_duration, length);
  out.valid.setConstant(max_duration, length, false);
  for (int d = 1; d <= max_duration; ++d) {
    for (int l = 0; l + d <= valid_length && l < length; ++l) {
      out.valid(d - 1, l) = true;
      const double a0 = l * time_per_snippet;
      const double a1 = (l + d) * time_per_snippet;
      double best = 0.0;
      for (const auto& inst : instances) best = std::max(best, tiou(a0, a1, inst.t_start, inst.t_end));
      out.iou(d - 1, l) = best;
    }
  }
  return out;
}

std::vector<GroundTruthInstance> to_local_time(const std::vector<GroundTruthInstance>& instances,
                                               double origin_seconds) {
  std::vector<GroundTruthInstance> out = instances;
  for (auto& inst : out) {
    inst.t_start -= origin_seconds;
    inst.t_end -= origin_seconds;
  }
  return out;
}

}  // namespace slotprop
