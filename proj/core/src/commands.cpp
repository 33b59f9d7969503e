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

#include "slotprop/commands.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "slotprop/plot.hpp"

namespace slotprop {

namespace fs = std::filesystem;
using nlohmann::json;

DatasetManifest cmd_synth(const RunConfig& config, const fs::path& out_dir) {
  return generate_synthetic_dataset(config.synth_spec(), out_dir);
}

fs::path annotations_for(const RunConfig& config, const fs::path& manifest) {
  if (!config.annotations.empty()) return config.annotations;
  return manifest.parent_path() / "annotations.json";
}

namespace {

std::optional<fs::path> cache_dir_from_env() {
  if (const char* dir = std::getenv("SLOTPROP_CACHE_DIR"); dir != nullptr && *dir != '\0') return fs::path(dir);
  return std::nullopt;
}

json config_json(const RunConfig& config) {
  json out = json::object();
  for (const auto& [k, v] : config.items()) out[k] = v;
  return out;
}

void write_checkpoint(const fs::path& dir, const RunConfig& config, SlotProposalModel& model, const Adam& adam,
                      const TrainState& state) {
  TensorArchive archive = model.export_parameters();
  adam.export_state(archive);
  save_archive(dir / "checkpoint.prsk", archive);
  json meta = {{"config", config_json(config)},
               {"epoch", state.epochs_done},
               {"global_step", state.global_step},
               {"seed", config.seed}};
  std::ofstream out(dir / "checkpoint.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "checkpoint.json").string());
  out << meta.dump(1) << '\n';
}

fs::path sidecar_for(const fs::path& checkpoint) {
  fs::path p = checkpoint;
  return p.replace_extension(".json");
}

}  // namespace

SlotProposalModel load_model(const RunConfig& config, const fs::path& checkpoint) {
  SlotProposalModel model(config.model_config(), config.seed);
  model.import_parameters(load_archive(checkpoint));
  return model;
}

TrainResult cmd_train(const RunConfig& config, const fs::path& manifest, const fs::path& out_dir,
                      const std::optional<fs::path>& resume) {
  config.validate();
  const DatasetManifest dataset = load_dataset(manifest, annotations_for(config, manifest), config.mode);
  if (dataset.entries.empty()) throw InvalidArgument("manifest lists no videos");
  const auto samples =
      build_samples(dataset, config.sequence_plan(), config.max_duration, config.feature_dim, cache_dir_from_env());

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const TrainConfig tc = config.train_config();
  SlotProposalModel model(config.model_config(), config.seed);
  Adam adam(tc);
  TrainState state;
  if (resume) {
    const auto archive = load_archive(*resume);
    model.import_parameters(archive);
    adam.import_state(archive);
    std::ifstream meta_in(sidecar_for(*resume));
    if (!meta_in) throw IoError("missing checkpoint metadata " + sidecar_for(*resume).string());
    const json meta = json::parse(meta_in);
    state.epochs_done = meta.at("epoch").get<int>();
    state.global_step = meta.at("global_step").get<std::int64_t>();
  }

  std::ofstream log(out_dir / "train_log.jsonl", resume ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write " + (out_dir / "train_log.jsonl").string());

  TrainResult result;
  result.checkpoint = out_dir / "checkpoint.prsk";
  result.logs = train(model, adam, samples, tc, state,
                      [&](const EpochLog& e, SlotProposalModel& m, const Adam& a, const TrainState& s) {
                        json rec = {{"epoch", e.epoch},          {"L_b", e.loss.boundary},
                                    {"L_cls", e.loss.cls},       {"L_com", e.loss.com},
                                    {"L_norm", e.loss.norm},     {"total", e.loss.total},
                                    {"wall_time_s", e.wall_time_s}};
                        log << rec.dump() << '\n' << std::flush;
                        write_checkpoint(out_dir, config, m, a, s);
                      });
  if (!fs::exists(result.checkpoint)) write_checkpoint(out_dir, config, model, adam, state);
  return result;
}

std::vector<Proposal> infer_video(SlotProposalModel& model, const ManifestEntry& entry, const RunConfig& config) {
  const auto windows = prepare_sequences(entry, config.sequence_plan(), config.feature_dim);
  std::vector<std::vector<Proposal>> per_window;
  std::vector<int> offsets;
  double time_per_snippet = 1.0;
  for (const auto& w : windows) {
    const ModelOutput out = model.forward(w.features, w.length(), false);
    const BoundaryScores scores = out.boundary_scores(0, w.valid_length);
    const ConfidenceMaps maps = out.confidence_maps(0, w.valid_length);
    auto valid_only = [&](std::vector<int> idx) {
      std::erase_if(idx, [&](int l) { return l >= w.valid_length; });
      return idx;
    };
    const auto starts = valid_only(boundary_candidates(scores.start, config.candidate_rule));
    const auto ends = valid_only(boundary_candidates(scores.end, config.candidate_rule));
    per_window.push_back(form_proposals(starts, ends, scores, maps, config.max_duration, w.time_per_snippet));
    offsets.push_back(w.origin_offset);
    time_per_snippet = w.time_per_snippet;
  }
  auto merged = merge_windows(per_window, offsets, time_per_snippet, config.suppression_config());
  if (config.max_proposals > 0 && merged.size() > static_cast<std::size_t>(config.max_proposals)) {
    merged.resize(static_cast<std::size_t>(config.max_proposals));
  }
  return merged;
}

ProposalFile cmd_infer(const RunConfig& config, const fs::path& checkpoint, const fs::path& manifest,
                       const fs::path& out_path) {
  config.validate();
  const DatasetManifest dataset = load_dataset(manifest, annotations_for(config, manifest), config.mode);
  const SlotProposalModel base = load_model(config, checkpoint);

  std::vector<std::vector<Proposal>> results(dataset.entries.size());
  std::vector<std::string> errors(dataset.entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    SlotProposalModel model = base;
    for (std::size_t i = next++; i < dataset.entries.size(); i = next++) {
      try {
        results[i] = infer_video(model, dataset.entries[i], config);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(dataset.entries.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw FormatError("video " + dataset.entries[i].video.id + ": " + errors[i]);
  }

  ProposalFile file;
  for (std::size_t i = 0; i < dataset.entries.size(); ++i) file[dataset.entries[i].video.id] = std::move(results[i]);
  write_proposals(out_path, file);
  return file;
}

fs::path curve_path_for(const fs::path& results_path) {
  fs::path p = results_path;
  p.replace_extension();
  return fs::path(p.string() + "_curve.csv");
}

EvalResults cmd_eval(const RunConfig& config, const fs::path& proposals, const fs::path& annotations,
                     const fs::path& out_path) {
  const SegmentsByVideo props = read_segments(proposals);
  GroundTruthByVideo gt = ground_truth_of(read_annotations(annotations));

  std::string missing;
  for (const auto& [id, list] : props) {
    if (!gt.contains(id)) missing += (missing.empty() ? "" : ", ") + id;
  }
  if (!missing.empty()) throw FormatError("proposal videos missing from annotations: " + missing);

  bool labelled = false;
  for (const auto& [id, list] : props)
    for (const auto& s : list) labelled = labelled || !s.label.empty();
  if (!labelled) {
    for (auto& [id, list] : gt)
      for (auto& g : list) g.label.clear();
  }

  const EvalResults results = evaluate(props, gt, config.eval_config());
  write_results(out_path, results);
  write_curve_csv(curve_path_for(out_path), results.curve);
  return results;
}

void cmd_plot(const fs::path& curve_csv, const fs::path& out_path) {
  std::ifstream in(curve_csv);
  if (!in) throw IoError("cannot open curve CSV: " + curve_csv.string());
  std::ostringstream text;
  text << in.rdbuf();
  const auto points = parse_curve_csv(text.str());
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + out_path.string());
  out << render_svg(points, "average number of proposals (AN)", "average recall (AR)");
}

}  // namespace slotprop
