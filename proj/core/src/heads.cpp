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

#include "slotprop/heads.hpp"

#include <algorithm>
#include <cmath>

namespace slotprop {

AnchorGrid anchor_grid(int max_duration, int length) {
  if (max_duration < 1 || length < 1) throw InvalidArgument("anchor grid needs D >= 1 and L >= 1");
  AnchorGrid grid;
  grid.max_duration = max_duration;
  grid.length = length;
  grid.valid.setConstant(max_duration, length, false);
  for (int d = 1; d <= max_duration; ++d)
    for (int l = 0; l + d <= length; ++l) grid.valid(d - 1, l) = true;
  return grid;
}

BoundaryHead::BoundaryHead(int embed_dim, Rng& rng) : conv(embed_dim, 2, 1, rng) {}

Mat BoundaryHead::forward(const Mat& slots, int seq_len) {
  probs_ = sigmoid(conv.forward(slots, seq_len));
  return probs_;
}

Mat BoundaryHead::backward(const Mat& d_probs) {
  const Mat d_logits = (d_probs.array() * probs_.array() * (1.0 - probs_.array())).matrix();
  return conv.backward(d_logits);
}

ProposalAligner::ProposalAligner(int max_duration, int seq_len, int bins)
    : grid_(anchor_grid(max_duration, seq_len)), bins_(bins) {
  if (bins < 1) throw InvalidArgument("align bins must be >= 1");
  std::vector<Eigen::Triplet<double>> triplets;
  for (int d = 1; d <= max_duration; ++d) {
    for (int l = 0; l + d <= seq_len; ++l) {
      const int row = (d - 1) * seq_len + l;
      for (int k = 0; k < bins; ++k) {
        const double x = bins == 1 ? l + 0.5 * (d - 1) : l + static_cast<double>(d - 1) * k / (bins - 1);
        const int lo = static_cast<int>(std::floor(x));
        const double frac = x - lo;
        triplets.emplace_back(row, lo, (1.0 - frac) / bins);
        if (frac > 0.0) triplets.emplace_back(row, lo + 1, frac / bins);
      }
    }
  }
  weights_.resize(static_cast<Eigen::Index>(max_duration) * seq_len, seq_len);
  weights_.setFromTriplets(triplets.begin(), triplets.end());
}

Mat ProposalAligner::forward(const Mat& slots) const {
  const Eigen::Index seq_len = grid_.length;
  const Eigen::Index cells = grid_.cells();
  const Eigen::Index batch = slots.rows() / seq_len;
  Mat out(batch * cells, slots.cols());
  for (Eigen::Index b = 0; b < batch; ++b) {
    out.middleRows(b * cells, cells) = weights_ * slots.middleRows(b * seq_len, seq_len);
  }
  return out;
}

Mat ProposalAligner::backward(const Mat& d_features) const {
  const Eigen::Index seq_len = grid_.length;
  const Eigen::Index cells = grid_.cells();
  const Eigen::Index batch = d_features.rows() / cells;
  Mat d_slots(batch * seq_len, d_features.cols());
  for (Eigen::Index b = 0; b < batch; ++b) {
    d_slots.middleRows(b * seq_len, seq_len) = weights_.transpose() * d_features.middleRows(b * cells, cells);
  }
  return d_slots;
}

Mat align_proposal_features(const Mat& slots, int max_duration, int bins) {
  return ProposalAligner(max_duration, static_cast<int>(slots.rows()), bins).forward(slots);
}

ConfidenceHead::ConfidenceHead(int in_dim, int hidden, Rng& rng) : fc1(in_dim, hidden, 1, rng), fc2(hidden, 1, 1, rng) {}

Mat ConfidenceHead::forward(const Mat& features) {
  const int rows = static_cast<int>(features.rows());
  hidden_pre_ = fc1.forward(features, rows);
  probs_ = sigmoid(fc2.forward(relu(hidden_pre_), rows));
  return probs_;
}

Mat ConfidenceHead::backward(const Mat& d_probs) {
  const Mat d_logits = (d_probs.array() * probs_.array() * (1.0 - probs_.array())).matrix();
  return fc1.backward(relu_backward(hidden_pre_, fc2.backward(d_logits)));
}

}  // namespace slotprop
