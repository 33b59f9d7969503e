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
#include <memory>
#include <string>
#include <vector>

#include "slotprop/common.hpp"
#include "slotprop/layers.hpp"
#include "slotprop/rng.hpp"

namespace slotprop {

enum class AttentionVariant { kRegion, kSimilarity };
enum class Fusion { kMean, kSum };
/// kSource: each target column is a distribution over its in-band sources.
/// kTarget: each source row is a distribution over the targets it reaches.
enum class SoftmaxAxis { kSource, kTarget };

struct SlotAttentionConfig {
  int feature_dim = 2048;  // C of the incoming snippet features
  int input_dim = 256;     // after the 1-wide channel transform
  int embed_dim = 256;
  int out_dim = 256;       // encoder width
  std::vector<int> scales{4, 8};
  int iterations = 2;
  AttentionVariant variant = AttentionVariant::kRegion;
  Fusion fusion = Fusion::kMean;
  SoftmaxAxis softmax_axis = SoftmaxAxis::kSource;
  bool residual = false;
  double bn_momentum = 0.1;

  void validate(int seq_len) const;
};

/// Banded attention for a batch of sequences. Row b*L + j holds target j of
/// sequence b; column m holds source i = j - s + m. Out-of-range sources are
/// invalid and carry weight exactly 0.
struct AttentionBand {
  int scale = 0;
  int seq_len = 0;
  Mat weights;  // (batch * L) x (2s + 1)

  int width() const { return 2 * scale + 1; }
  bool valid(Eigen::Index row, int m) const {
    const int i = static_cast<int>(row % seq_len) - scale + m;
    return i >= 0 && i < seq_len;
  }
  /// Dense L x L matrix A(i, j) = weight of source i for target j, for one sequence.
  Mat to_dense(int batch_index = 0) const;
};

/// Raw banded decoder scores from encoded row features R ((batch*L) x C_out):
/// raw(j, i) = bias + sum_k [0 <= i+k < L, |i+k-j| <= s] <w_k, R_{i+k}>. Invalid
/// entries are left at 0. `decoder_weight` is (2s+1) x C_out, row k+s holding w_k.
Mat banded_scores(const Mat& row_features, int scale, const Mat& decoder_weight, double decoder_bias, int seq_len);

/// Masked softmax of raw band scores along `axis`.
AttentionBand normalize_band(const Mat& raw, int scale, int seq_len, SoftmaxAxis axis = SoftmaxAxis::kSource);
/// Gradient of the masked softmax w.r.t. raw scores.
Mat normalize_band_backward(const AttentionBand& band, const Mat& d_weights, SoftmaxAxis axis);

/// output_j = sum over in-band i of A(i, j) * values_i.
Mat apply_band(const AttentionBand& band, const Mat& values);

/// Shared interface of the two band scorers (one per scale and iteration).
class BandScorer {
 public:
  virtual ~BandScorer() = default;
  virtual Mat forward(const Mat& slots, int seq_len) = 0;
  virtual Mat backward(const Mat& d_raw) = 0;
  virtual void visit(const std::string& prefix, const std::function<void(const std::string&, Param&)>& f) = 0;
  virtual std::unique_ptr<BandScorer> clone() const = 0;
  virtual int scale() const = 0;
};

/// Encoder (1-wide channel transform, then a (2s+1)-tap temporal convolution)
/// followed by the banded decoder.
class RegionScorer final : public BandScorer {
 public:
  RegionScorer(int embed_dim, int out_dim, int scale, Rng& rng);

  /// Row features R of the encoder; caches for backward.
  Mat encode(const Mat& slots, int seq_len);
  Mat forward(const Mat& slots, int seq_len) override;
  Mat backward(const Mat& d_raw) override;
  void visit(const std::string& prefix, const std::function<void(const std::string&, Param&)>& f) override;
  std::unique_ptr<BandScorer> clone() const override { return std::make_unique<RegionScorer>(*this); }
  int scale() const override { return scale_; }

  Conv1d transform;
  Conv1d encoder;
  Param decoder_weight;  // (2s+1) x out_dim
  Param decoder_bias;    // 1 x 1

 private:
  int scale_;
  int seq_len_ = 0;
  Mat row_features_;
};

/// Scaled dot-product scores restricted to the band.
class SimilarityScorer final : public BandScorer {
 public:
  SimilarityScorer(int embed_dim, int scale, Rng& rng);

  Mat forward(const Mat& slots, int seq_len) override;
  Mat backward(const Mat& d_raw) override;
  void visit(const std::string& prefix, const std::function<void(const std::string&, Param&)>& f) override;
  std::unique_ptr<BandScorer> clone() const override { return std::make_unique<SimilarityScorer>(*this); }
  int scale() const override { return scale_; }

  Conv1d query;
  Conv1d key;

 private:
  int scale_;
  int seq_len_ = 0;
  Mat q_, k_;
};

/// Channel transform, width-3 convolution + ReLU, plus fixed sinusoidal positions.
class InputEmbedding {
 public:
  InputEmbedding() = default;
  InputEmbedding(int feature_dim, int input_dim, int embed_dim, Rng& rng);

  Mat forward(const Mat& x, int seq_len);
  Mat backward(const Mat& d_slots);

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    project.visit(prefix + ".project", f);
    temporal.visit(prefix + ".temporal", f);
  }

  Conv1d project;
  Conv1d temporal;

 private:
  Mat pre_relu_;
};

/// One pyramid update: per-scale bands fused, weighted sum of values, batch norm.
class SlotIteration {
 public:
  SlotIteration(const SlotAttentionConfig& config, Rng& rng);
  SlotIteration(const SlotIteration& other);
  SlotIteration& operator=(const SlotIteration& other);
  SlotIteration(SlotIteration&&) noexcept = default;
  SlotIteration& operator=(SlotIteration&&) noexcept = default;

  Mat forward(const Mat& slots, int seq_len, bool training);
  Mat backward(const Mat& d_out);

  void visit(const std::string& prefix, const std::function<void(const std::string&, Param&)>& f);

  /// Bands from the last forward call, one per scale.
  const std::vector<AttentionBand>& bands() const { return bands_; }
  double fusion_weight() const { return fusion_weight_; }
  /// Dense fused attention of one sequence from the last forward call.
  Mat fused_dense(int batch_index = 0) const;

  std::vector<std::unique_ptr<BandScorer>> scorers;
  Conv1d value;
  BatchNorm norm;

 private:
  SoftmaxAxis axis_ = SoftmaxAxis::kSource;
  bool residual_ = false;
  double fusion_weight_ = 1.0;
  int seq_len_ = 0;
  std::vector<AttentionBand> bands_;
  Mat values_;
};

/// Embedding followed by `iterations` independent (untied) slot updates.
class PyramidSlotAttention {
 public:
  PyramidSlotAttention() = default;
  PyramidSlotAttention(const SlotAttentionConfig& config, Rng& rng);

  /// x is (batch * seq_len) x feature_dim.
  Mat forward(const Mat& x, int seq_len, bool training);
  /// Returns d(loss)/d(x).
  Mat backward(const Mat& d_slots);

  void visit(const std::string& prefix, const std::function<void(const std::string&, Param&)>& f);

  const SlotAttentionConfig& config() const { return config_; }

  InputEmbedding embedding;
  std::vector<SlotIteration> iterations;

 private:
  SlotAttentionConfig config_;
};

}  // namespace slotprop
