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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slotprop/data_model.hpp"
#include "slotprop/labels.hpp"
#include "slotprop/losses.hpp"
#include "slotprop/model.hpp"

namespace slotprop {

struct LrSegment {
  double lr = 2e-4;
  int epochs = 0;  // 0 on the last segment means "until the end"

  bool operator==(const LrSegment&) const = default;
};

struct TrainConfig {
  double lambda_norm = 2e-4;
  double lambda_com = 10.0;
  double label_threshold = 0.5;  // boundary label binarization
  double map_threshold = 0.5;    // anchor map binarization for L_cls
  std::vector<LrSegment> lr_schedule{{2e-4, 0}};
  int epochs = 10;
  int batch_size = 8;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  double lr_at(int epoch) const;
};

/// One fixed-length training window with its labels.
struct TrainingSample {
  std::string video_id;
  Mat features;  // L x C
  int valid_length = 0;
  BoundaryLabels boundary;
  ProposalLabelMap anchors;
};

/// Sequence preparation shared by training and inference.
struct SequencePlan {
  SequenceMode mode = SequenceMode::kWindowed;
  int snippet_interval = 4;
  int length = 250;  // window length or rescale target
  int stride = 100;
};

/// Loads a video's features and cuts/rescales them into model-ready sequences.
std::vector<SnippetFeatureSequence> prepare_sequences(const ManifestEntry& entry, const SequencePlan& plan,
                                                      int expected_channels);

/// Builds samples for every video; label maps are cached under `cache_dir` when set.
std::vector<TrainingSample> build_samples(const DatasetManifest& dataset, const SequencePlan& plan, int max_duration,
                                          int expected_channels,
                                          const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// Loss of one batch. With `accumulate_grad`, parameter gradients are zeroed and
/// filled with d(total)/d(param).
LossBreakdown batch_objective(SlotProposalModel& model, const std::vector<const TrainingSample*>& batch,
                              const TrainConfig& config, bool training, bool accumulate_grad);

/// Adaptive-moment optimizer over the model's trainable parameters.
class Adam {
 public:
  explicit Adam(const TrainConfig& config) : beta1_(config.beta1), beta2_(config.beta2), eps_(config.adam_eps) {}

  void step(SlotProposalModel& model, double lr);
  std::int64_t steps() const { return step_; }

  void export_state(TensorArchive& archive) const;
  void import_state(const TensorArchive& archive);

 private:
  double beta1_, beta2_, eps_;
  std::int64_t step_ = 0;
  std::map<std::string, Mat> m_, v_;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  LossBreakdown loss;  // mean over the epoch's steps
  double wall_time_s = 0.0;
  std::vector<double> step_losses;
};

struct TrainState {
  int epochs_done = 0;
  std::int64_t global_step = 0;
};

using EpochCallback = std::function<void(const EpochLog&, SlotProposalModel&, const Adam&, const TrainState&)>;

/// Runs epochs [state.epochs_done, config.epochs). Batch order per epoch is a
/// seed-determined shuffle. Throws DivergenceError on a non-finite loss.
std::vector<EpochLog> train(SlotProposalModel& model, Adam& optimizer, const std::vector<TrainingSample>& samples,
                            const TrainConfig& config, TrainState& state, const EpochCallback& on_epoch = {});

/// Training order of sample indices for one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

}  // namespace slotprop
