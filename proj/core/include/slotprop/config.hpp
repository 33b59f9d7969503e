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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slotprop/data_model.hpp"
#include "slotprop/inference.hpp"
#include "slotprop/metrics.hpp"
#include "slotprop/model.hpp"
#include "slotprop/training.hpp"

namespace slotprop {

/// Every tunable of the pipeline. Serialized as flat "key = value" text.
struct RunConfig {
  // sequences
  SequenceMode mode = SequenceMode::kWindowed;
  int snippet_interval = 4;
  int temporal_length = 250;  // window length (windowed) or rescale target (rescaled)
  int window_stride = 100;
  int max_duration = 64;
  // model
  int feature_dim = 2048;
  int input_dim = 256;
  int embed_dim = 256;
  int out_dim = 256;
  std::vector<int> scales{4, 8};
  int iterations = 2;
  AttentionVariant attention_variant = AttentionVariant::kRegion;
  Fusion fusion = Fusion::kMean;
  SoftmaxAxis softmax_axis = SoftmaxAxis::kSource;
  bool residual = false;
  int align_bins = 16;
  int head_hidden = 128;
  double bn_momentum = 0.1;
  // training
  double lambda_norm = 2e-4;
  double lambda_com = 10.0;
  double label_binarize_thresh = 0.5;
  double map_binarize_thresh = 0.5;
  std::vector<LrSegment> lr_schedule{{2e-4, 0}};
  int epochs = 10;
  int batch_size = 8;
  // inference
  Suppression suppress = Suppression::kNms;
  double nms_threshold = 0.65;
  double soft_nms_sigma = 0.5;
  double soft_nms_keep = 0.001;
  std::optional<double> soft_nms_hard_threshold;
  SoftNmsDecay soft_nms_decay = SoftNmsDecay::kGaussian;
  double soft_nms_linear_threshold = 0.0;
  CandidateRule candidate_rule = CandidateRule::kOr;
  int max_proposals = 1000;  // per video after suppression, 0 = unlimited
  // evaluation
  EvalMode eval_mode = EvalMode::kThumos;
  std::vector<int> an_values{50, 100, 200, 500};
  bool video_weighted = false;
  // synthetic data
  int synth_videos = 20;
  int synth_length = 64;
  int synth_channels = 32;
  int synth_max_instances = 3;
  double synth_offset = 1.5;
  double synth_noise = 1.0;
  int synth_classes = 1;
  std::uint64_t synth_pattern_seed = 0;
  double synth_fps = 25.0;
  // global
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string annotations;  // defaults to annotations.json beside the manifest

  bool operator==(const RunConfig&) const = default;

  /// Named defaults: "thumos" or "anet".
  static RunConfig profile(const std::string& name);

  /// Applies one key; throws InvalidArgument on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Keys and rendered values in documentation order.
  std::vector<std::pair<std::string, std::string>> items() const;
  /// Checks cross-module invariants.
  void validate() const;

  ModelConfig model_config() const;
  TrainConfig train_config() const;
  SequencePlan sequence_plan() const;
  SuppressionConfig suppression_config() const;
  EvalConfig eval_config() const;
  SynthSpec synth_spec() const;
};

/// Reads "key = value" lines ('#' starts a comment). A "profile" key, when
/// present, must come first and resets to that profile.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
RunConfig parse_config(const std::string& text, RunConfig base = {});
std::string render_config(const RunConfig& config);
void save_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace slotprop
