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

#include <functional>
#include <map>
#include <string>

#include "slotprop/heads.hpp"
#include "slotprop/slot_attention.hpp"
#include "slotprop/tensor_io.hpp"

namespace slotprop {

struct ModelConfig {
  SlotAttentionConfig slots;
  HeadConfig heads;
};

/// Forward results for a batch of equal-length sequences.
struct ModelOutput {
  int batch = 0;
  int seq_len = 0;
  int max_duration = 0;
  Mat boundary;  // (batch * L) x 2 probabilities, column 0 start, column 1 end
  Mat cls;       // (batch * D * L) x 1, rows ordered (b, d - 1, l)
  Mat com;

  /// Boundary scores of sequence b with positions >= valid_length zeroed.
  BoundaryScores boundary_scores(int b, int valid_length = -1) const;
  /// Confidence maps of sequence b; anchors past valid_length are invalid and zero.
  ConfidenceMaps confidence_maps(int b, int valid_length = -1) const;
};

struct ModelGradient {
  Mat boundary;
  Mat cls;
  Mat com;
};

/// Slot attention backbone with the boundary head and the two anchor-map heads.
class SlotProposalModel {
 public:
  SlotProposalModel() = default;
  SlotProposalModel(const ModelConfig& config, std::uint64_t seed);

  /// x is (batch * seq_len) x feature_dim.
  ModelOutput forward(const Mat& x, int seq_len, bool training);
  void backward(const ModelGradient& grad);

  using Visitor = std::function<void(const std::string&, Param&)>;
  /// Visits every parameter (trainable and statistics) in a fixed order.
  void visit(const Visitor& f);

  void zero_grad();
  /// Sum of squares of all trainable parameters.
  double l2_norm();
  /// Adds 2 * scale * value to each trainable gradient (gradient of scale * l2_norm()).
  void add_l2_grad(double scale);

  TensorArchive export_parameters();
  /// Replaces parameter values; throws FormatError naming the first missing or
  /// mis-shaped parameter.
  void import_parameters(const TensorArchive& archive);

  const ModelConfig& config() const { return config_; }

  PyramidSlotAttention backbone;
  BoundaryHead boundary_head;
  ConfidenceHead cls_head;
  ConfidenceHead com_head;

 private:
  const ProposalAligner& aligner(int seq_len);

  ModelConfig config_;
  std::map<int, ProposalAligner> aligners_;
  int seq_len_ = 0;
};

}  // namespace slotprop
