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

#include "slotprop/common.hpp"
#include "slotprop/rng.hpp"

namespace slotprop {

/// A named tensor with its accumulated gradient. Non-trainable params hold
/// normalization statistics: checkpointed, but skipped by the optimizer and L2 term.
struct Param {
  Mat value;
  Mat grad;
  bool trainable = true;

  Param() = default;
  explicit Param(Mat v, bool train = true) : value(std::move(v)), grad(Mat::Zero(value.rows(), value.cols())), trainable(train) {}
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Mat fan_in_uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in);

/// Temporal convolution over a batch of equal-length sequences stacked as
/// (batch * seq_len) x channels. Odd width, stride 1, zero padding (width-1)/2.
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(int in_channels, int out_channels, int width, Rng& rng);

  Mat forward(const Mat& x, int seq_len);
  /// Accumulates parameter gradients, returns d(loss)/d(x).
  Mat backward(const Mat& dy);

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int width() const { return width_; }

  Param weight;  // (width * in) x out; tap k multiplies x[i + k - pad]
  Param bias;    // 1 x out

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".weight", weight);
    f(prefix + ".bias", bias);
  }

 private:
  int in_ = 0, out_ = 0, width_ = 1;
  int seq_len_ = 0;
  Mat cols_;
};

/// Per-channel batch normalization over all rows (batch x time).
class BatchNorm {
 public:
  BatchNorm() = default;
  explicit BatchNorm(int channels, double momentum = 0.1, double eps = 1e-5);

  Mat forward(const Mat& x, bool training);
  Mat backward(const Mat& dy);

  Param gamma, beta;
  Param running_mean, running_var;  // non-trainable

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".gamma", gamma);
    f(prefix + ".beta", beta);
    f(prefix + ".running_mean", running_mean);
    f(prefix + ".running_var", running_var);
  }

  double momentum = 0.1;
  double eps = 1e-5;

 private:
  bool training_ = false;
  Mat x_hat_;
  RowVec inv_std_;
};

Mat relu(const Mat& x);
/// dy masked by (x > 0).
Mat relu_backward(const Mat& x, const Mat& dy);
Mat sigmoid(const Mat& x);

/// Fixed sinusoidal position table, seq_len x dim.
Mat sinusoidal_positions(int seq_len, int dim);

}  // namespace slotprop
