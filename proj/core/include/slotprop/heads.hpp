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

#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "slotprop/common.hpp"
#include "slotprop/layers.hpp"

namespace slotprop {

struct HeadConfig {
  int max_duration = 64;  // D
  int align_bins = 16;
  int hidden = 128;
};

/// Per-snippet start/end probabilities of one sequence.
struct BoundaryScores {
  Vec start;  // P_s
  Vec end;    // P_e
};

using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// D x L maps indexed by (duration - 1, start); invalid anchors hold 0.
struct ConfidenceMaps {
  Mat cls;  // M_cls
  Mat com;  // M_com
  BoolMat valid;
};

/// Dense anchor grid: anchor (d, l) covers snippets [l, l + d), d in 1..D.
struct AnchorGrid {
  int max_duration = 0;
  int length = 0;
  BoolMat valid;  // D x L, valid iff l + d <= L

  Eigen::Index cells() const { return static_cast<Eigen::Index>(max_duration) * length; }
  Eigen::Index valid_count() const { return valid.count(); }
};

AnchorGrid anchor_grid(int max_duration, int length);

/// 1-wide convolution to two channels and a logistic; column 0 is start, 1 is end.
class BoundaryHead {
 public:
  BoundaryHead() = default;
  BoundaryHead(int embed_dim, Rng& rng);

  /// Returns (batch * L) x 2 probabilities.
  Mat forward(const Mat& slots, int seq_len);
  Mat backward(const Mat& d_probs);

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    conv.visit(prefix + ".conv", f);
  }

  Conv1d conv;

 private:
  Mat probs_;
};

/// Linear-interpolation alignment: each valid anchor averages `bins` samples of
/// the slot sequence taken uniformly over [l, l + d - 1]. Rows are ordered
/// (batch, d - 1, l); invalid anchors are zero rows.
class ProposalAligner {
 public:
  ProposalAligner() = default;
  ProposalAligner(int max_duration, int seq_len, int bins);

  Mat forward(const Mat& slots) const;
  Mat backward(const Mat& d_features) const;

  const Eigen::SparseMatrix<double, Eigen::RowMajor>& weights() const { return weights_; }
  const AnchorGrid& grid() const { return grid_; }

 private:
  AnchorGrid grid_;
  int bins_ = 1;
  Eigen::SparseMatrix<double, Eigen::RowMajor> weights_;  // (D * L) x L
};

/// Anchor features for one sequence (D * L rows). Convenience over ProposalAligner.
Mat align_proposal_features(const Mat& slots, int max_duration, int bins);

/// Two-layer perceptron with a logistic output: sigmoid(w2 . relu(W1 f + b1) + b2).
class ConfidenceHead {
 public:
  ConfidenceHead() = default;
  ConfidenceHead(int in_dim, int hidden, Rng& rng);

  /// features: N x in_dim -> N x 1 probabilities.
  Mat forward(const Mat& features);
  Mat backward(const Mat& d_probs);

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    fc1.visit(prefix + ".fc1", f);
    fc2.visit(prefix + ".fc2", f);
  }

  Conv1d fc1;
  Conv1d fc2;

 private:
  Mat hidden_pre_;
  Mat probs_;
};

}  // namespace slotprop
