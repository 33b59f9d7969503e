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

#include "slotprop/losses.hpp"

#include <algorithm>
#include <cmath>

namespace slotprop {

double weighted_logistic_loss(const Vec& probs, const Vec& targets, double threshold, const std::vector<bool>* mask,
                              Vec* grad) {
  if (probs.size() != targets.size() || (mask != nullptr && static_cast<Eigen::Index>(mask->size()) != probs.size())) {
    throw InvalidArgument("weighted_logistic_loss: length mismatch");
  }
  if (grad != nullptr) grad->setZero(probs.size());
  auto active = [&](Eigen::Index i) { return mask == nullptr || (*mask)[static_cast<std::size_t>(i)]; };

  double n = 0.0, n_pos = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (!active(i)) continue;
    n += 1.0;
    if (targets(i) > threshold) n_pos += 1.0;
  }
  if (n == 0.0) return 0.0;
  const double n_neg = n - n_pos;
  const double w_pos = n_pos > 0.0 ? n / (2.0 * n_pos) : 0.0;
  const double w_neg = n_neg > 0.0 ? n / (2.0 * n_neg) : 0.0;

  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (!active(i)) continue;
    const double raw = probs(i);
    const double p = std::clamp(raw, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    const bool clamped = p != raw;
    if (targets(i) > threshold) {
      loss -= w_pos * std::log(p);
      if (grad != nullptr && !clamped) (*grad)(i) = -w_pos / (p * n);
    } else {
      loss -= w_neg * std::log(1.0 - p);
      if (grad != nullptr && !clamped) (*grad)(i) = w_neg / ((1.0 - p) * n);
    }
  }
  return loss / n;
}

double boundary_loss(const BoundaryScores& scores, const BoundaryLabels& labels, double threshold) {
  return 0.5 * (weighted_logistic_loss(scores.start, labels.start, threshold) +
                weighted_logistic_loss(scores.end, labels.end, threshold));
}

double masked_mse(const Vec& pred, const Vec& target, const std::vector<bool>& mask, Vec* grad) {
  if (pred.size() != target.size() || static_cast<Eigen::Index>(mask.size()) != pred.size()) {
    throw InvalidArgument("masked_mse: length mismatch");
  }
  if (grad != nullptr) grad->setZero(pred.size());
  double n = 0.0, sum = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    n += 1.0;
    const double diff = pred(i) - target(i);
    sum += diff * diff;
  }
  if (n == 0.0) return 0.0;
  if (grad != nullptr) {
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      if (mask[static_cast<std::size_t>(i)]) (*grad)(i) = 2.0 * (pred(i) - target(i)) / n;
    }
  }
  return sum / n;
}

namespace {

Vec flatten(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

std::vector<bool> flatten(const BoolMat& m) {
  std::vector<bool> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
  return out;
}

}  // namespace

ProposalLoss proposal_loss(const ConfidenceMaps& maps, const ProposalLabelMap& labels, double lambda_com,
                           double threshold) {
  if (maps.cls.rows() != labels.iou.rows() || maps.cls.cols() != labels.iou.cols() ||
      maps.com.rows() != labels.iou.rows() || maps.com.cols() != labels.iou.cols()) {
    throw InvalidArgument("proposal_loss: map shape mismatch");
  }
  const auto mask = flatten(labels.valid);
  const Vec target = flatten(labels.iou);
  ProposalLoss out;
  out.cls = weighted_logistic_loss(flatten(maps.cls), target, threshold, &mask);
  out.com = masked_mse(flatten(maps.com), target, mask);
  out.total = out.cls + lambda_com * out.com;
  return out;
}

LossBreakdown total_loss(double boundary, const ProposalLoss& proposal, double norm, double lambda) {
  if (lambda < 0) throw InvalidArgument("lambda must be >= 0");
  LossBreakdown out;
  out.boundary = boundary;
  out.proposal = proposal.total;
  out.cls = proposal.cls;
  out.com = proposal.com;
  out.norm = norm;
  out.total = boundary + proposal.total + lambda * norm;
  return out;
}

}  // namespace slotprop
