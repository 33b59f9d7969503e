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
#include "slotprop/heads.hpp"
#include "slotprop/labels.hpp"

namespace slotprop {

inline constexpr double kProbabilityEpsilon = 1e-6;

struct LossBreakdown {
  double total = 0.0;
  double boundary = 0.0;  // L_b
  double proposal = 0.0;  // L_p = L_cls + lambda_c * L_com
  double cls = 0.0;       // L_cls
  double com = 0.0;       // L_com
  double norm = 0.0;      // L_norm (sum of squared trainable parameters)
};

/// Class-balanced logistic loss. Targets are binarized at `threshold`;
/// positives are weighted n / (2 n+) and negatives n / (2 n-), with an empty
/// side contributing nothing. `mask` (optional, same length) selects entries.
/// When `grad` is non-null it receives d(loss)/d(probs) (zero where masked or clamped).
double weighted_logistic_loss(const Vec& probs, const Vec& targets, double threshold,
                              const std::vector<bool>* mask = nullptr, Vec* grad = nullptr);

/// Mean of the start and end terms.
double boundary_loss(const BoundaryScores& scores, const BoundaryLabels& labels, double threshold = 0.5);

struct ProposalLoss {
  double total = 0.0;
  double cls = 0.0;
  double com = 0.0;
};

/// L_cls (weighted logistic over valid anchors) + lambda_c * L_com (MSE over valid anchors).
ProposalLoss proposal_loss(const ConfidenceMaps& maps, const ProposalLabelMap& labels, double lambda_com = 10.0,
                           double threshold = 0.5);

/// Mean squared error over masked entries; optional gradient.
double masked_mse(const Vec& pred, const Vec& target, const std::vector<bool>& mask, Vec* grad = nullptr);

/// L_b + L_p + lambda * L_norm.
LossBreakdown total_loss(double boundary, const ProposalLoss& proposal, double norm, double lambda);

}  // namespace slotprop
