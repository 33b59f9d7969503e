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

#include "slotprop/slot_attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slotprop {

void SlotAttentionConfig::validate(int seq_len) const {
  if (feature_dim < 1 || input_dim < 1 || embed_dim < 1 || out_dim < 1) {
    throw InvalidArgument("slot attention channel sizes must be positive");
  }
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (scales.empty()) throw InvalidArgument("scale set must be non-empty");
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const int s = scales[k];
    if (std::find(scales.begin(), scales.begin() + static_cast<std::ptrdiff_t>(k), s) != scales.begin() + static_cast<std::ptrdiff_t>(k)) {
      throw InvalidArgument("duplicate region scale " + std::to_string(s));
    }
    if (s < 1) throw InvalidArgument("region scales must be >= 1");
    if (seq_len > 0 && s >= seq_len) {
      throw InvalidArgument("region scale " + std::to_string(s) + " must be smaller than L=" + std::to_string(seq_len));
    }
  }
}

Mat AttentionBand::to_dense(int batch_index) const {
  Mat dense = Mat::Zero(seq_len, seq_len);
  const Eigen::Index base = static_cast<Eigen::Index>(batch_index) * seq_len;
  for (int j = 0; j < seq_len; ++j) {
    for (int m = 0; m < width(); ++m) {
      const int i = j - scale + m;
      if (i >= 0 && i < seq_len) dense(i, j) = weights(base + j, m);
    }
  }
  return dense;
}

Mat banded_scores(const Mat& rows, int s, const Mat& w, double b, int seq_len) {
  const int width = 2 * s + 1;
  // proj(r, k + s) = <w_k, R_r>
  const Mat proj = rows * w.transpose();
  const Eigen::Index batch = rows.rows() / seq_len;
  Mat raw = Mat::Zero(rows.rows(), width);
  for (Eigen::Index bi = 0; bi < batch; ++bi) {
    const Eigen::Index base = bi * seq_len;
    for (int j = 0; j < seq_len; ++j) {
      for (int m = 0; m < width; ++m) {
        const int i = j - s + m;
        if (i < 0 || i >= seq_len) continue;
        double acc = b;
        // Row i + k survives the band mask of column j only when |i + k - j| <= s.
        const int k_lo = std::max({-s, -i, j - s - i});
        const int k_hi = std::min({s, seq_len - 1 - i, j + s - i});
        for (int k = k_lo; k <= k_hi; ++k) acc += proj(base + i + k, k + s);
        raw(base + j, m) = acc;
      }
    }
  }
  return raw;
}

namespace {

// Calls f(row, m) for every valid entry of one softmax group.
template <typename F>
void for_each_source_group(int s, int seq_len, Eigen::Index batch, F&& f) {
  const int width = 2 * s + 1;
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (int j = 0; j < seq_len; ++j) {
      const int m_lo = std::max(0, s - j);
      const int m_hi = std::min(width - 1, seq_len - 1 - j + s);
      f(b * seq_len + j, m_lo, m_hi);
    }
  }
}

struct Entry {
  Eigen::Index row;
  int m;
};

std::vector<Entry> target_group(Eigen::Index base, int i, int s, int seq_len) {
  std::vector<Entry> group;
  for (int m = 0; m <= 2 * s; ++m) {
    const int j = i + s - m;
    if (j >= 0 && j < seq_len) group.push_back({base + j, m});
  }
  return group;
}

void softmax_entries(const Mat& raw, Mat& out, const std::vector<Entry>& group) {
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& e : group) mx = std::max(mx, raw(e.row, e.m));
  double sum = 0.0;
  for (const auto& e : group) sum += (out(e.row, e.m) = std::exp(raw(e.row, e.m) - mx));
  for (const auto& e : group) out(e.row, e.m) /= sum;
}

}  // namespace

AttentionBand normalize_band(const Mat& raw, int s, int seq_len, SoftmaxAxis axis) {
  AttentionBand band;
  band.scale = s;
  band.seq_len = seq_len;
  band.weights = Mat::Zero(raw.rows(), raw.cols());
  const Eigen::Index batch = raw.rows() / seq_len;
  if (axis == SoftmaxAxis::kSource) {
    for_each_source_group(s, seq_len, batch, [&](Eigen::Index row, int lo, int hi) {
      const double mx = raw.row(row).segment(lo, hi - lo + 1).maxCoeff();
      auto seg = band.weights.row(row).segment(lo, hi - lo + 1);
      seg = (raw.row(row).segment(lo, hi - lo + 1).array() - mx).exp().matrix();
      seg /= seg.sum();
    });
  } else {
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (int i = 0; i < seq_len; ++i) softmax_entries(raw, band.weights, target_group(b * seq_len, i, s, seq_len));
    }
  }
  return band;
}

Mat normalize_band_backward(const AttentionBand& band, const Mat& d_weights, SoftmaxAxis axis) {
  const int s = band.scale;
  const int seq_len = band.seq_len;
  const Mat& a = band.weights;
  Mat d_raw = Mat::Zero(a.rows(), a.cols());
  const Eigen::Index batch = a.rows() / seq_len;
  if (axis == SoftmaxAxis::kSource) {
    for_each_source_group(s, seq_len, batch, [&](Eigen::Index row, int lo, int hi) {
      const int n = hi - lo + 1;
      const double dot = a.row(row).segment(lo, n).dot(d_weights.row(row).segment(lo, n));
      d_raw.row(row).segment(lo, n) =
          (a.row(row).segment(lo, n).array() * (d_weights.row(row).segment(lo, n).array() - dot)).matrix();
    });
  } else {
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (int i = 0; i < seq_len; ++i) {
        const auto group = target_group(b * seq_len, i, s, seq_len);
        double dot = 0.0;
        for (const auto& e : group) dot += a(e.row, e.m) * d_weights(e.row, e.m);
        for (const auto& e : group) d_raw(e.row, e.m) = a(e.row, e.m) * (d_weights(e.row, e.m) - dot);
      }
    }
  }
  return d_raw;
}

Mat apply_band(const AttentionBand& band, const Mat& values) {
  const int s = band.scale;
  const int seq_len = band.seq_len;
  Mat out = Mat::Zero(values.rows(), values.cols());
  const Eigen::Index batch = values.rows() / seq_len;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::Index base = b * seq_len;
    for (int j = 0; j < seq_len; ++j) {
      for (int m = 0; m < band.width(); ++m) {
        const int i = j - s + m;
        if (i < 0 || i >= seq_len) continue;
        out.row(base + j) += band.weights(base + j, m) * values.row(base + i);
      }
    }
  }
  return out;
}

namespace {

// Gradients of out = c * apply_band(band, values).
void apply_band_backward(const AttentionBand& band, const Mat& values, const Mat& d_out, double c, Mat& d_values,
                         Mat& d_weights) {
  const int s = band.scale;
  const int seq_len = band.seq_len;
  d_weights = Mat::Zero(band.weights.rows(), band.weights.cols());
  const Eigen::Index batch = values.rows() / seq_len;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::Index base = b * seq_len;
    for (int j = 0; j < seq_len; ++j) {
      for (int m = 0; m < band.width(); ++m) {
        const int i = j - s + m;
        if (i < 0 || i >= seq_len) continue;
        d_values.row(base + i) += c * band.weights(base + j, m) * d_out.row(base + j);
        d_weights(base + j, m) = c * d_out.row(base + j).dot(values.row(base + i));
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

RegionScorer::RegionScorer(int embed_dim, int out_dim, int scale, Rng& rng)
    : transform(embed_dim, out_dim, 1, rng),
      encoder(out_dim, out_dim, 2 * scale + 1, rng),
      decoder_weight(fan_in_uniform(rng, 2 * scale + 1, out_dim, static_cast<Eigen::Index>(2 * scale + 1) * out_dim)),
      decoder_bias(Mat::Zero(1, 1)),
      scale_(scale) {}

Mat RegionScorer::encode(const Mat& slots, int seq_len) {
  seq_len_ = seq_len;
  row_features_ = encoder.forward(transform.forward(slots, seq_len), seq_len);
  return row_features_;
}

Mat RegionScorer::forward(const Mat& slots, int seq_len) {
  encode(slots, seq_len);
  return banded_scores(row_features_, scale_, decoder_weight.value, decoder_bias.value(0, 0), seq_len);
}

Mat RegionScorer::backward(const Mat& d_raw) {
  const int s = scale_;
  const int width = 2 * s + 1;
  const Eigen::Index batch = d_raw.rows() / seq_len_;
  Mat d_proj = Mat::Zero(d_raw.rows(), width);
  double d_bias = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::Index base = b * seq_len_;
    for (int j = 0; j < seq_len_; ++j) {
      for (int m = 0; m < width; ++m) {
        const int i = j - s + m;
        if (i < 0 || i >= seq_len_) continue;
        const double g = d_raw(base + j, m);
        d_bias += g;
        const int k_lo = std::max({-s, -i, j - s - i});
        const int k_hi = std::min({s, seq_len_ - 1 - i, j + s - i});
        for (int k = k_lo; k <= k_hi; ++k) d_proj(base + i + k, k + s) += g;
      }
    }
  }
  decoder_bias.grad(0, 0) += d_bias;
  decoder_weight.grad.noalias() += d_proj.transpose() * row_features_;
  const Mat d_rows = d_proj * decoder_weight.value;
  return transform.backward(encoder.backward(d_rows));
}

void RegionScorer::visit(const std::string& prefix, const std::function<void(const std::string&, Param&)>& f) {
  transform.visit(prefix + ".transform", f);
  encoder.visit(prefix + ".encoder", f);
  f(prefix + ".decoder.weight", decoder_weight);
  f(prefix + ".decoder.bias", decoder_bias);
}

SimilarityScorer::SimilarityScorer(int embed_dim, int scale, Rng& rng)
    : query(embed_dim, embed_dim, 1, rng), key(embed_dim, embed_dim, 1, rng), scale_(scale) {}

Mat SimilarityScorer::forward(const Mat& slots, int seq_len) {
  seq_len_ = seq_len;
  q_ = query.forward(slots, seq_len);
  k_ = key.forward(slots, seq_len);
  const double inv = 1.0 / std::sqrt(static_cast<double>(q_.cols()));
  const int s = scale_;
  Mat raw = Mat::Zero(slots.rows(), 2 * s + 1);
  const Eigen::Index batch = slots.rows() / seq_len;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::Index base = b * seq_len;
    for (int j = 0; j < seq_len; ++j) {
      for (int m = 0; m <= 2 * s; ++m) {
        const int i = j - s + m;
        if (i >= 0 && i < seq_len) raw(base + j, m) = inv * q_.row(base + j).dot(k_.row(base + i));
      }
    }
  }
  return raw;
}

Mat SimilarityScorer::backward(const Mat& d_raw) {
  const double inv = 1.0 / std::sqrt(static_cast<double>(q_.cols()));
  const int s = scale_;
  Mat dq = Mat::Zero(q_.rows(), q_.cols());
  Mat dk = Mat::Zero(k_.rows(), k_.cols());
  const Eigen::Index batch = q_.rows() / seq_len_;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::Index base = b * seq_len_;
    for (int j = 0; j < seq_len_; ++j) {
      for (int m = 0; m <= 2 * s; ++m) {
        const int i = j - s + m;
        if (i < 0 || i >= seq_len_) continue;
        const double g = inv * d_raw(base + j, m);
        dq.row(base + j) += g * k_.row(base + i);
        dk.row(base + i) += g * q_.row(base + j);
      }
    }
  }
  Mat d_slots = query.backward(dq);
  d_slots += key.backward(dk);
  return d_slots;
}

void SimilarityScorer::visit(const std::string& prefix, const std::function<void(const std::string&, Param&)>& f) {
  query.visit(prefix + ".query", f);
  key.visit(prefix + ".key", f);
}

// ---------------------------------------------------------------------------

InputEmbedding::InputEmbedding(int feature_dim, int input_dim, int embed_dim, Rng& rng)
    : project(feature_dim, input_dim, 1, rng), temporal(input_dim, embed_dim, 3, rng) {}

Mat InputEmbedding::forward(const Mat& x, int seq_len) {
  pre_relu_ = temporal.forward(project.forward(x, seq_len), seq_len);
  Mat out = relu(pre_relu_);
  const Mat pe = sinusoidal_positions(seq_len, static_cast<int>(out.cols()));
  const Eigen::Index batch = out.rows() / seq_len;
  for (Eigen::Index b = 0; b < batch; ++b) out.middleRows(b * seq_len, seq_len) += pe;
  return out;
}

Mat InputEmbedding::backward(const Mat& d_slots) {
  return project.backward(temporal.backward(relu_backward(pre_relu_, d_slots)));
}

// ---------------------------------------------------------------------------

SlotIteration::SlotIteration(const SlotAttentionConfig& config, Rng& rng)
    : value(config.embed_dim, config.embed_dim, 1, rng),
      norm(config.embed_dim, config.bn_momentum),
      axis_(config.softmax_axis),
      residual_(config.residual),
      fusion_weight_(config.fusion == Fusion::kMean ? 1.0 / static_cast<double>(config.scales.size()) : 1.0) {
  for (int s : config.scales) {
    if (config.variant == AttentionVariant::kRegion) {
      scorers.push_back(std::make_unique<RegionScorer>(config.embed_dim, config.out_dim, s, rng));
    } else {
      scorers.push_back(std::make_unique<SimilarityScorer>(config.embed_dim, s, rng));
    }
  }
}

SlotIteration::SlotIteration(const SlotIteration& other)
    : value(other.value),
      norm(other.norm),
      axis_(other.axis_),
      residual_(other.residual_),
      fusion_weight_(other.fusion_weight_),
      seq_len_(other.seq_len_),
      bands_(other.bands_),
      values_(other.values_) {
  for (const auto& s : other.scorers) scorers.push_back(s->clone());
}

SlotIteration& SlotIteration::operator=(const SlotIteration& other) {
  if (this != &other) {
    SlotIteration copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Mat SlotIteration::forward(const Mat& slots, int seq_len, bool training) {
  seq_len_ = seq_len;
  values_ = value.forward(slots, seq_len);
  bands_.clear();
  Mat mixed = Mat::Zero(slots.rows(), slots.cols());
  for (auto& scorer : scorers) {
    bands_.push_back(normalize_band(scorer->forward(slots, seq_len), scorer->scale(), seq_len, axis_));
    mixed += fusion_weight_ * apply_band(bands_.back(), values_);
  }
  if (residual_) mixed += slots;
  return norm.forward(mixed, training);
}

Mat SlotIteration::backward(const Mat& d_out) {
  const Mat d_mixed = norm.backward(d_out);
  Mat d_slots = residual_ ? d_mixed : Mat::Zero(d_mixed.rows(), d_mixed.cols());
  Mat d_values = Mat::Zero(values_.rows(), values_.cols());
  for (std::size_t k = 0; k < scorers.size(); ++k) {
    Mat d_weights;
    apply_band_backward(bands_[k], values_, d_mixed, fusion_weight_, d_values, d_weights);
    d_slots += scorers[k]->backward(normalize_band_backward(bands_[k], d_weights, axis_));
  }
  d_slots += value.backward(d_values);
  return d_slots;
}

void SlotIteration::visit(const std::string& prefix, const std::function<void(const std::string&, Param&)>& f) {
  for (auto& scorer : scorers) scorer->visit(prefix + ".scale" + std::to_string(scorer->scale()), f);
  value.visit(prefix + ".value", f);
  norm.visit(prefix + ".norm", f);
}

Mat SlotIteration::fused_dense(int batch_index) const {
  Mat dense = Mat::Zero(seq_len_, seq_len_);
  for (const auto& band : bands_) dense += fusion_weight_ * band.to_dense(batch_index);
  return dense;
}

// ---------------------------------------------------------------------------

PyramidSlotAttention::PyramidSlotAttention(const SlotAttentionConfig& config, Rng& rng)
    : embedding(config.feature_dim, config.input_dim, config.embed_dim, rng), config_(config) {
  config.validate(0);
  for (int t = 0; t < config.iterations; ++t) iterations.emplace_back(config, rng);
}

Mat PyramidSlotAttention::forward(const Mat& x, int seq_len, bool training) {
  Mat slots = embedding.forward(x, seq_len);
  for (auto& it : iterations) slots = it.forward(slots, seq_len, training);
  return slots;
}

Mat PyramidSlotAttention::backward(const Mat& d_slots) {
  Mat d = d_slots;
  for (auto it = iterations.rbegin(); it != iterations.rend(); ++it) d = it->backward(d);
  return embedding.backward(d);
}

void PyramidSlotAttention::visit(const std::string& prefix,
                                 const std::function<void(const std::string&, Param&)>& f) {
  embedding.visit(prefix + ".embed", f);
  for (std::size_t t = 0; t < iterations.size(); ++t) iterations[t].visit(prefix + ".iter" + std::to_string(t), f);
}

}  // namespace slotprop
