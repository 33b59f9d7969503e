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

#include "slotprop/layers.hpp"

#include <cmath>

namespace slotprop {

Mat fan_in_uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

Conv1d::Conv1d(int in_channels, int out_channels, int width, Rng& rng)
    : weight(fan_in_uniform(rng, static_cast<Eigen::Index>(width) * in_channels, out_channels,
                            static_cast<Eigen::Index>(width) * in_channels)),
      bias(Mat::Zero(1, out_channels)),
      in_(in_channels),
      out_(out_channels),
      width_(width) {
  if (in_channels < 1 || out_channels < 1 || width < 1 || width % 2 == 0) {
    throw InvalidArgument("Conv1d needs positive channels and an odd width");
  }
}

Mat Conv1d::forward(const Mat& x, int seq_len) {
  if (x.cols() != in_) {
    throw InvalidArgument("Conv1d expected " + std::to_string(in_) + " input channels, got " +
                          std::to_string(x.cols()));
  }
  if (seq_len < 1 || x.rows() % seq_len != 0) throw InvalidArgument("Conv1d rows not a multiple of seq_len");
  seq_len_ = seq_len;
  if (width_ == 1) {
    cols_ = x;
  } else {
    const int pad = width_ / 2;
    const Eigen::Index batch = x.rows() / seq_len;
    cols_ = Mat::Zero(x.rows(), static_cast<Eigen::Index>(width_) * in_);
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (int i = 0; i < seq_len; ++i) {
        for (int k = 0; k < width_; ++k) {
          const int src = i + k - pad;
          if (src < 0 || src >= seq_len) continue;
          cols_.block(b * seq_len + i, static_cast<Eigen::Index>(k) * in_, 1, in_) = x.row(b * seq_len + src);
        }
      }
    }
  }
  Mat y = cols_ * weight.value;
  y.rowwise() += bias.value.row(0);
  return y;
}

Mat Conv1d::backward(const Mat& dy) {
  weight.grad.noalias() += cols_.transpose() * dy;
  bias.grad.row(0) += dy.colwise().sum();
  Mat dcols = dy * weight.value.transpose();
  if (width_ == 1) return dcols;
  const int pad = width_ / 2;
  const Eigen::Index batch = dy.rows() / seq_len_;
  Mat dx = Mat::Zero(dy.rows(), in_);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (int i = 0; i < seq_len_; ++i) {
      for (int k = 0; k < width_; ++k) {
        const int src = i + k - pad;
        if (src < 0 || src >= seq_len_) continue;
        dx.row(b * seq_len_ + src) += dcols.block(b * seq_len_ + i, static_cast<Eigen::Index>(k) * in_, 1, in_);
      }
    }
  }
  return dx;
}

BatchNorm::BatchNorm(int channels, double mom, double epsilon)
    : gamma(Mat::Ones(1, channels)),
      beta(Mat::Zero(1, channels)),
      running_mean(Mat::Zero(1, channels), false),
      running_var(Mat::Ones(1, channels), false),
      momentum(mom),
      eps(epsilon) {}

Mat BatchNorm::forward(const Mat& x, bool training) {
  training_ = training;
  const double n = static_cast<double>(x.rows());
  RowVec mean, var;
  if (training) {
    mean = x.colwise().mean();
    var = (x.rowwise() - mean).array().square().colwise().sum().matrix() / n;
    const double unbias = n > 1 ? n / (n - 1) : 1.0;
    running_mean.value.row(0) = (1 - momentum) * running_mean.value.row(0) + momentum * mean;
    running_var.value.row(0) = (1 - momentum) * running_var.value.row(0) + momentum * unbias * var;
  } else {
    mean = running_mean.value.row(0);
    var = running_var.value.row(0);
  }
  inv_std_ = (var.array() + eps).rsqrt().matrix();
  x_hat_ = (x.rowwise() - mean).array().rowwise() * inv_std_.array();
  Mat y = x_hat_.array().rowwise() * gamma.value.row(0).array();
  y.rowwise() += beta.value.row(0);
  return y;
}

Mat BatchNorm::backward(const Mat& dy) {
  gamma.grad.row(0) += (dy.array() * x_hat_.array()).colwise().sum().matrix();
  beta.grad.row(0) += dy.colwise().sum();
  const RowVec scale = (gamma.value.row(0).array() * inv_std_.array()).matrix();
  if (!training_) return dy.array().rowwise() * scale.array();
  // Batch statistics depend on every row.
  const double n = static_cast<double>(dy.rows());
  const RowVec sum_dy = dy.colwise().sum();
  const RowVec sum_dy_xhat = (dy.array() * x_hat_.array()).colwise().sum().matrix();
  Mat dx = (n * dy.array()).matrix();
  dx.rowwise() -= sum_dy;
  dx.array() -= x_hat_.array().rowwise() * sum_dy_xhat.array();
  dx.array().rowwise() *= (scale.array() / n);
  return dx;
}

Mat relu(const Mat& x) { return x.cwiseMax(0.0); }

Mat relu_backward(const Mat& x, const Mat& dy) { return (x.array() > 0.0).select(dy, 0.0); }

Mat sigmoid(const Mat& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

Mat sinusoidal_positions(int seq_len, int dim) {
  Mat pe(seq_len, dim);
  for (int pos = 0; pos < seq_len; ++pos) {
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      pe(pos, i) = (i % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
    }
  }
  return pe;
}

}  // namespace slotprop
