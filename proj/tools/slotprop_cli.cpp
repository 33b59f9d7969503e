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

// Command-line entry point: synth, train, infer, eval, plot.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slotprop/commands.hpp"

namespace {

constexpr int kExitInvalidInput = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string config_path;
  std::string profile = "thumos";
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string suppress;
  std::vector<std::string> overrides;
};

slotprop::RunConfig resolve_config(const GlobalOptions& opt) {
  slotprop::RunConfig config = slotprop::RunConfig::profile(opt.profile);
  if (!opt.config_path.empty()) config = slotprop::load_config(opt.config_path, config);
  for (const auto& kv : opt.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw slotprop::InvalidArgument("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed) config.seed = *opt.seed;
  if (opt.jobs) config.jobs = *opt.jobs;
  if (!opt.suppress.empty()) config.set("suppress", opt.suppress);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal action proposals with pyramid region-based slot attention"};
  app.require_subcommand(1);

  GlobalOptions opt;
  app.add_option("--config", opt.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--profile", opt.profile, "default profile: thumos | anet")->capture_default_str();
  app.add_option("--seed", opt.seed, "root random seed");
  app.add_option("--jobs", opt.jobs, "worker threads for per-video stages");
  app.add_option("--suppress", opt.suppress, "post-processing: none | nms | soft_nms");
  app.add_option("--set", opt.overrides, "override a config key (key=value), repeatable");

  std::string out_dir, manifest, resume, checkpoint, out_path, proposals, annotations, curve;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", out_dir, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--manifest", manifest, "dataset manifest JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "output directory for checkpoint and log")->required();
  train->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);

  auto* infer = app.add_subcommand("infer", "generate proposals");
  infer->add_option("--checkpoint", checkpoint, "checkpoint archive")->required()->check(CLI::ExistingFile);
  infer->add_option("--manifest", manifest, "dataset manifest JSON")->required()->check(CLI::ExistingFile);
  infer->add_option("--out", out_path, "proposal JSON to write")->required();

  auto* eval = app.add_subcommand("eval", "evaluate proposals");
  eval->add_option("--proposals", proposals, "proposal JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--annotations", annotations, "annotation JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out_path, "results JSON (curve CSV is written beside it)")->required();

  auto* plot = app.add_subcommand("plot", "plot an AR-vs-AN curve CSV as SVG");
  plot->add_option("--curve", curve, "curve CSV with AN,AR columns")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", out_path, "SVG to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidInput;
  }

  try {
    const slotprop::RunConfig config = resolve_config(opt);
    if (*synth) {
      const auto ds = slotprop::cmd_synth(config, out_dir);
      std::printf("wrote %zu videos to %s\n", ds.entries.size(), out_dir.c_str());
    } else if (*train) {
      std::optional<std::filesystem::path> from;
      if (!resume.empty()) from = resume;
      const auto result = slotprop::cmd_train(config, manifest, out_dir, from);
      for (const auto& e : result.logs) {
        std::printf("epoch %d  total %.6f  L_b %.6f  L_cls %.6f  L_com %.6f  (%.2fs)\n", e.epoch, e.loss.total,
                    e.loss.boundary, e.loss.cls, e.loss.com, e.wall_time_s);
      }
      std::printf("checkpoint: %s\n", result.checkpoint.c_str());
    } else if (*infer) {
      const auto file = slotprop::cmd_infer(config, checkpoint, manifest, out_path);
      std::printf("wrote proposals for %zu videos to %s\n", file.size(), out_path.c_str());
    } else if (*eval) {
      const auto r = slotprop::cmd_eval(config, proposals, annotations, out_path);
      for (const auto& [an, ar] : r.ar_at_an) std::printf("AR@%d = %.4f\n", an, ar);
      std::printf("AUC = %.4f\n", r.auc);
      for (const auto& [t, m] : r.map) std::printf("mAP@%.2f = %.4f\n", t, m);
    } else if (*plot) {
      slotprop::cmd_plot(curve, out_path);
      std::printf("wrote %s\n", out_path.c_str());
    }
  } catch (const slotprop::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalidInput;
  } catch (const slotprop::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalidInput;
  } catch (const slotprop::DivergenceError& e) {
    std::fprintf(stderr, "error: training diverged at step %lld: %s\n", static_cast<long long>(e.step()), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
