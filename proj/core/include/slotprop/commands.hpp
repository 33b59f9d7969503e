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

#include <filesystem>
#include <optional>
#include <vector>

#include "slotprop/config.hpp"
#include "slotprop/inference.hpp"
#include "slotprop/metrics.hpp"
#include "slotprop/training.hpp"

namespace slotprop {

/// Synthetic dataset (features/, annotations.json, manifest.json) under out_dir.
DatasetManifest cmd_synth(const RunConfig& config, const std::filesystem::path& out_dir);

struct TrainResult {
  std::vector<EpochLog> logs;
  std::filesystem::path checkpoint;
};

/// Trains and writes out_dir/checkpoint.prsk, checkpoint.json (metadata sidecar)
/// and train_log.jsonl (one record per epoch). The checkpoint is refreshed after
/// every epoch; `resume` continues from such a checkpoint.
TrainResult cmd_train(const RunConfig& config, const std::filesystem::path& manifest,
                      const std::filesystem::path& out_dir,
                      const std::optional<std::filesystem::path>& resume = std::nullopt);

/// Loads a model from a checkpoint archive; shape mismatches name the parameter.
SlotProposalModel load_model(const RunConfig& config, const std::filesystem::path& checkpoint);

/// Proposals for one video: per-window scoring, candidate pairing, window merge
/// and the configured suppression.
std::vector<Proposal> infer_video(SlotProposalModel& model, const ManifestEntry& entry, const RunConfig& config);

/// Runs inference on every manifest video (config.jobs workers; output order
/// is independent of the worker count) and writes the proposal JSON.
ProposalFile cmd_infer(const RunConfig& config, const std::filesystem::path& checkpoint,
                       const std::filesystem::path& manifest, const std::filesystem::path& out_path);

/// Writes the results JSON to out_path and the AR-vs-AN curve to
/// <out_path without extension>_curve.csv.
EvalResults cmd_eval(const RunConfig& config, const std::filesystem::path& proposals,
                     const std::filesystem::path& annotations, const std::filesystem::path& out_path);

std::filesystem::path curve_path_for(const std::filesystem::path& results_path);

/// Renders an AN,AR CSV as an SVG line plot.
void cmd_plot(const std::filesystem::path& curve_csv, const std::filesystem::path& out_path);

/// Resolves the annotation file for a manifest: config.annotations or
/// annotations.json beside the manifest.
std::filesystem::path annotations_for(const RunConfig& config, const std::filesystem::path& manifest);

}  // namespace slotprop
