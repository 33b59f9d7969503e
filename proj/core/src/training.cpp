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

#include "slotprop/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "slotprop/rng.hpp"

namespace slotprop {

double TrainConfig::lr_at(int epoch) const {
  if (lr_schedule.empty()) throw InvalidArgument("empty learning-rate schedule");
  int start = 0;
  for (std::size_t i = 0; i < lr_schedule.size(); ++i) {
    const auto& seg = lr_schedule[i];
    if (seg.epochs <= 0 || i + 1 == lr_schedule.size() || epoch < start + seg.epochs) return seg.lr;
    start += seg.epochs;
  }
  return lr_schedule.back().lr;
}

std::vector<SnippetFeatureSequence> prepare_sequences(const ManifestEntry& entry, const SequencePlan& plan,
                                                      int expected_channels) {
  SnippetFeatureSequence full = load_feature_sequence(entry.feature_path, 0, expected_channels);
  const VideoRecord& video = entry.video;
  full.snippet_interval = plan.snippet_interval;
  if (plan.mode == SequenceMode::kWindowed && video.fps > 0) {
    full.time_per_snippet = plan.snippet_interval / video.fps;
  } else {
    full.time_per_snippet = video.duration > 0 ? video.duration / full.length() : 1.0;
  }
  if (plan.mode == SequenceMode::kRescaled) return {rescale_sequence(full, plan.length)};
  return window_sequence(full, plan.length, plan.stride);
}

namespace {

std::string cache_key(const std::string& video_id, const SnippetFeatureSequence& seq, int max_duration,
                      const std::vector<GroundTruthInstance>& instances) {
  std::ostringstream key;
  key.precision(17);
  key << video_id << '|' << seq.origin_offset << '|' << seq.length() << '|' << seq.valid_length << '|'
      << seq.time_per_snippet << '|' << max_duration;
  for (const auto& inst : instances) key << '|' << inst.t_start << ',' << inst.t_end;
  char name[40];
  std::snprintf(name, sizeof name, "labels_%016llx.prsk", static_cast<unsigned long long>(stable_hash(key.str())));
  return name;
}

void make_labels(TrainingSample& sample, const SnippetFeatureSequence& seq, int max_duration,
                 const std::vector<GroundTruthInstance>& local) {
  sample.boundary = boundary_labels(local, seq.length(), seq.time_per_snippet);
  sample.anchors = proposal_label_map(local, max_duration, seq.length(), seq.time_per_snippet, seq.valid_length);
  for (int l = seq.valid_length; l < seq.length(); ++l) sample.boundary.start(l) = sample.boundary.end(l) = 0.0;
}

}  // namespace

std::vector<TrainingSample> build_samples(const DatasetManifest& dataset, const SequencePlan& plan, int max_duration,
                                          int expected_channels, const std::optional<std::filesystem::path>& cache_dir) {
  std::vector<TrainingSample> samples;
  for (const auto& entry : dataset.entries) {
    for (auto& seq : prepare_sequences(entry, plan, expected_channels)) {
      TrainingSample sample;
      sample.video_id = entry.video.id;
      sample.valid_length = seq.valid_length;
      const auto local = to_local_time(entry.video.instances, seq.origin_offset * seq.time_per_snippet);

      bool loaded = false;
      std::filesystem::path cache_file;
      if (cache_dir) {
        cache_file = *cache_dir / cache_key(entry.video.id, seq, max_duration, local);
        if (std::filesystem::exists(cache_file)) {
          const auto archive = load_archive(cache_file);
          if (archive.size() == 4) {
            sample.boundary.start = archive[0].second.transpose();
            sample.boundary.end = archive[1].second.transpose();
            sample.anchors.iou = archive[2].second;
            sample.anchors.valid = (archive[3].second.array() > 0.5).matrix();
            loaded = true;
          }
        }
      }
      if (!loaded) {
        make_labels(sample, seq, max_duration, local);
        if (cache_dir) {
          std::filesystem::create_directories(*cache_dir);
          save_archive(cache_file, {{"start", sample.boundary.start.transpose()},
                                    {"end", sample.boundary.end.transpose()},
                                    {"iou", sample.anchors.iou},
                                    {"valid", sample.anchors.valid.cast<double>()}});
        }
      }
      sample.features = std::move(seq.features);
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

LossBreakdown batch_objective(SlotProposalModel& model, const std::vector<const TrainingSample*>& batch,
                              const TrainConfig& config, bool training, bool accumulate_grad) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const int seq_len = static_cast<int>(batch.front()->features.rows());
  const int max_duration = model.config().heads.max_duration;
  const Eigen::Index cells = static_cast<Eigen::Index>(max_duration) * seq_len;
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());

  Mat x(n * seq_len, batch.front()->features.cols());
  Vec g_start(n * seq_len), g_end(n * seq_len), g_map(n * cells);
  std::vector<bool> pos_mask(static_cast<std::size_t>(n * seq_len)), anchor_mask(static_cast<std::size_t>(n * cells));
  for (Eigen::Index b = 0; b < n; ++b) {
    const TrainingSample& s = *batch[static_cast<std::size_t>(b)];
    if (s.features.rows() != seq_len) throw InvalidArgument("batch samples differ in length");
    if (s.anchors.iou.rows() != max_duration) throw InvalidArgument("sample label map does not match model D");
    x.middleRows(b * seq_len, seq_len) = s.features;
    g_start.segment(b * seq_len, seq_len) = s.boundary.start;
    g_end.segment(b * seq_len, seq_len) = s.boundary.end;
    for (int l = 0; l < seq_len; ++l) pos_mask[static_cast<std::size_t>(b * seq_len + l)] = l < s.valid_length;
    for (int d = 0; d < max_duration; ++d) {
      for (int l = 0; l < seq_len; ++l) {
        const Eigen::Index idx = b * cells + static_cast<Eigen::Index>(d) * seq_len + l;
        g_map(idx) = s.anchors.iou(d, l);
        anchor_mask[static_cast<std::size_t>(idx)] = s.anchors.valid(d, l);
      }
    }
  }

  const ModelOutput out = model.forward(x, seq_len, training);
  const Vec p_start = out.boundary.col(0);
  const Vec p_end = out.boundary.col(1);
  const Vec p_cls = out.cls.col(0);
  const Vec p_com = out.com.col(0);

  Vec d_start, d_end, d_cls, d_com;
  Vec* gs = accumulate_grad ? &d_start : nullptr;
  Vec* ge = accumulate_grad ? &d_end : nullptr;
  Vec* gc = accumulate_grad ? &d_cls : nullptr;
  Vec* gm = accumulate_grad ? &d_com : nullptr;

  const double loss_start = weighted_logistic_loss(p_start, g_start, config.label_threshold, &pos_mask, gs);
  const double loss_end = weighted_logistic_loss(p_end, g_end, config.label_threshold, &pos_mask, ge);
  ProposalLoss prop;
  prop.cls = weighted_logistic_loss(p_cls, g_map, config.map_threshold, &anchor_mask, gc);
  prop.com = masked_mse(p_com, g_map, anchor_mask, gm);
  prop.total = prop.cls + config.lambda_com * prop.com;
  const LossBreakdown loss = total_loss(0.5 * (loss_start + loss_end), prop, model.l2_norm(), config.lambda_norm);

  if (accumulate_grad) {
    model.zero_grad();
    ModelGradient grad;
    grad.boundary.resize(n * seq_len, 2);
    grad.boundary.col(0) = 0.5 * d_start;
    grad.boundary.col(1) = 0.5 * d_end;
    grad.cls = d_cls;
    grad.com = config.lambda_com * d_com;
    model.backward(grad);
    model.add_l2_grad(config.lambda_norm);
  }
  return loss;
}

void Adam::step(SlotProposalModel& model, double lr) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  model.visit([&](const std::string& name, Param& p) {
    if (!p.trainable) return;
    auto [mit, m_new] = m_.try_emplace(name, Mat::Zero(p.value.rows(), p.value.cols()));
    auto [vit, v_new] = v_.try_emplace(name, Mat::Zero(p.value.rows(), p.value.cols()));
    Mat& m = mit->second;
    Mat& v = vit->second;
    m = beta1_ * m + (1.0 - beta1_) * p.grad;
    v = beta2_ * v + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps_);
  });
}

void Adam::export_state(TensorArchive& archive) const {
  archive.emplace_back("adam.step", Mat::Constant(1, 1, static_cast<double>(step_)));
  for (const auto& [name, m] : m_) archive.emplace_back("adam.m." + name, m);
  for (const auto& [name, v] : v_) archive.emplace_back("adam.v." + name, v);
}

void Adam::import_state(const TensorArchive& archive) {
  m_.clear();
  v_.clear();
  step_ = 0;
  for (const auto& [name, tensor] : archive) {
    if (name == "adam.step") {
      step_ = static_cast<std::int64_t>(tensor(0, 0));
    } else if (name.rfind("adam.m.", 0) == 0) {
      m_[name.substr(7)] = tensor;
    } else if (name.rfind("adam.v.", 0) == 0) {
      v_[name.substr(7)] = tensor;
    }
  }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "train/order", static_cast<std::uint64_t>(epoch)));
  // Fisher-Yates with explicit draws so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<EpochLog> train(SlotProposalModel& model, Adam& optimizer, const std::vector<TrainingSample>& samples,
                            const TrainConfig& config, TrainState& state, const EpochCallback& on_epoch) {
  if (samples.empty()) throw InvalidArgument("training set is empty");
  if (config.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  std::vector<EpochLog> logs;
  for (int epoch = state.epochs_done; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = config.lr_at(epoch);
    const auto order = epoch_order(samples.size(), config.seed, epoch);
    EpochLog log;
    log.epoch = epoch + 1;
    int steps = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      std::vector<const TrainingSample*> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + config.batch_size); ++k) {
        batch.push_back(&samples[order[k]]);
      }
      const LossBreakdown loss = batch_objective(model, batch, config, true, true);
      ++state.global_step;
      if (!std::isfinite(loss.total)) {
        throw DivergenceError(state.global_step,
                              "non-finite loss at step " + std::to_string(state.global_step) + " (epoch " +
                                  std::to_string(epoch + 1) + ")");
      }
      optimizer.step(model, lr);
      log.step_losses.push_back(loss.total);
      log.loss.total += loss.total;
      log.loss.boundary += loss.boundary;
      log.loss.proposal += loss.proposal;
      log.loss.cls += loss.cls;
      log.loss.com += loss.com;
      log.loss.norm += loss.norm;
      ++steps;
    }
    const double inv = 1.0 / steps;
    log.loss.total *= inv;
    log.loss.boundary *= inv;
    log.loss.proposal *= inv;
    log.loss.cls *= inv;
    log.loss.com *= inv;
    log.loss.norm *= inv;
    log.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    state.epochs_done = epoch + 1;
    if (on_epoch) on_epoch(log, model, optimizer, state);
    logs.push_back(std::move(log));
  }
  return logs;
}

}  // namespace slotprop
