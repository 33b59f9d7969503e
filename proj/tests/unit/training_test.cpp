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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "nlohmann/json.hpp"
#include "slotprop/commands.hpp"
#include "slotprop/config.hpp"
#include "slotprop/training.hpp"
#include "test_util.hpp"

namespace slotprop {
namespace {

using testing::TempDir;

RunConfig desk_config() { return load_config(std::filesystem::path(SLOTPROP_CONFIG_DIR) / "synthetic.cfg"); }

TEST(LrSchedule, Segments) {
  TrainConfig cfg;
  cfg.lr_schedule = {{1e-3, 7}, {1e-4, 3}};
  EXPECT_EQ(cfg.lr_at(0), 1e-3);
  EXPECT_EQ(cfg.lr_at(6), 1e-3);
  EXPECT_EQ(cfg.lr_at(7), 1e-4);
  EXPECT_EQ(cfg.lr_at(9), 1e-4);
  EXPECT_EQ(cfg.lr_at(50), 1e-4);
}

TEST(EpochOrder, DeterministicPermutation) {
  const auto a = epoch_order(20, 5, 0);
  EXPECT_EQ(a, epoch_order(20, 5, 0));
  EXPECT_NE(a, epoch_order(20, 5, 1));
  EXPECT_NE(a, epoch_order(20, 6, 0));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(20);
  std::iota(iota.begin(), iota.end(), 0);
  EXPECT_EQ(sorted, iota);
}

struct TinySetup {
  std::vector<TrainingSample> samples;
  ModelConfig model = testing::tiny_model_config();
  TrainConfig train;
};

TinySetup tiny_setup() {
  TinySetup s;
  std::mt19937_64 gen(42);
  s.samples = testing::random_samples(gen, 6, 8, 3, 4, false);
  s.train.batch_size = 2;
  s.train.epochs = 3;
  s.train.lr_schedule = {{1e-2, 0}};
  return s;
}

TEST(Train, SameSeedGivesIdenticalStepLosses) {
  auto s = tiny_setup();
  std::vector<double> runs[2];
  for (auto& losses : runs) {
    SlotProposalModel model(s.model, 3);
    Adam adam(s.train);
    TrainState state;
    for (const auto& e : train(model, adam, s.samples, s.train, state))
      losses.insert(losses.end(), e.step_losses.begin(), e.step_losses.end());
  }
  ASSERT_GE(runs[0].size(), 5u);
  EXPECT_EQ(runs[0], runs[1]);
}

TEST(Train, ZeroLearningRateLeavesParametersAndLoss) {
  auto s = tiny_setup();
  s.train.lr_schedule = {{0.0, 0}};
  s.train.batch_size = static_cast<int>(s.samples.size());
  SlotProposalModel model(s.model, 4);
  const auto before = model.export_parameters();
  Adam adam(s.train);
  TrainState state;
  const auto logs = train(model, adam, s.samples, s.train, state);
  ASSERT_EQ(logs.size(), 3u);
  // The full batch is reshuffled each epoch, so only summation order changes.
  EXPECT_NEAR(logs[0].loss.total, logs[1].loss.total, 1e-12 * logs[0].loss.total);
  EXPECT_NEAR(logs[1].loss.total, logs[2].loss.total, 1e-12 * logs[0].loss.total);
  const auto after = model.export_parameters();
  for (std::size_t k = 0; k < before.size(); ++k) {
    if (before[k].first.find("running_") != std::string::npos) continue;  // statistics still track batches
    EXPECT_EQ(before[k].second, after[k].second) << before[k].first;
  }
}

TEST(Train, LossIsBatchPermutationInvariantInEvalMode) {
  auto s = tiny_setup();
  SlotProposalModel model(s.model, 5);
  std::vector<const TrainingSample*> batch;
  for (const auto& x : s.samples) batch.push_back(&x);
  const double a = batch_objective(model, batch, s.train, false, false).total;
  std::reverse(batch.begin(), batch.end());
  std::swap(batch[1], batch[3]);
  EXPECT_NEAR(batch_objective(model, batch, s.train, false, false).total, a, 1e-12 * std::abs(a));
}

TEST(Train, NonFiniteLossReportsStep) {
  auto s = tiny_setup();
  SlotProposalModel model(s.model, 6);
  Adam adam(s.train);
  TrainState state;
  int calls = 0;
  // Poison a parameter after the first epoch so the divergence happens mid-run.
  s.train.epochs = 2;
  try {
    train(model, adam, s.samples, s.train, state, [&](const EpochLog&, SlotProposalModel& m, const Adam&, const TrainState&) {
      ++calls;
      m.cls_head.fc2.bias.value(0, 0) = std::numeric_limits<double>::quiet_NaN();
    });
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.step(), 4);  // 3 steps per epoch, first step of epoch 2
    EXPECT_NE(std::string(e.what()).find("step 4"), std::string::npos);
  }
  EXPECT_EQ(calls, 1);
}

TEST(Train, SyntheticLossDecreasesOverFirstEpochs) {
  TempDir dir("train_dec");
  RunConfig cfg = desk_config();
  cfg.epochs = 3;
  cmd_synth(cfg, dir / "data");
  const auto result = cmd_train(cfg, dir / "data/manifest.json", dir / "run");
  ASSERT_EQ(result.logs.size(), 3u);
  EXPECT_LT(result.logs[1].loss.total, result.logs[0].loss.total);
  EXPECT_LT(result.logs[2].loss.total, result.logs[1].loss.total);

  std::ifstream log(dir / "run/train_log.jsonl");
  std::string line;
  int records = 0;
  while (std::getline(log, line)) {
    const auto rec = nlohmann::json::parse(line);
    for (const char* key : {"epoch", "L_b", "L_cls", "L_com", "L_norm", "total", "wall_time_s"})
      EXPECT_TRUE(rec.contains(key)) << key;
    EXPECT_EQ(rec.at("epoch").get<int>(), ++records);
  }
  EXPECT_EQ(records, 3);
}

TEST(Train, ResumeReproducesUninterruptedRun) {
  TempDir dir("resume");
  RunConfig cfg = desk_config();
  cfg.synth_videos = 6;
  cmd_synth(cfg, dir / "data");
  cfg.epochs = 3;
  const auto full = cmd_train(cfg, dir / "data/manifest.json", dir / "full");
  cfg.epochs = 2;
  cmd_train(cfg, dir / "data/manifest.json", dir / "part");
  cfg.epochs = 3;
  const auto resumed = cmd_train(cfg, dir / "data/manifest.json", dir / "part", dir / "part/checkpoint.prsk");
  ASSERT_EQ(resumed.logs.size(), 1u);
  EXPECT_EQ(resumed.logs[0].epoch, 3);
  EXPECT_EQ(resumed.logs[0].step_losses, full.logs[2].step_losses);
  EXPECT_EQ(testing::read_file(dir / "full/checkpoint.prsk"), testing::read_file(dir / "part/checkpoint.prsk"));
  const auto meta = nlohmann::json::parse(testing::read_file(dir / "part/checkpoint.json"));
  EXPECT_EQ(meta.at("epoch").get<int>(), 3);
  EXPECT_TRUE(meta.contains("config"));
  EXPECT_TRUE(meta.contains("seed"));
}

TEST(Train, LabelCacheGivesSameSamples) {
  TempDir dir("cache");
  RunConfig cfg = desk_config();
  cfg.synth_videos = 3;
  cmd_synth(cfg, dir / "data");
  const auto ds = load_dataset(dir / "data/manifest.json", dir / "data/annotations.json", SequenceMode::kWindowed);
  const auto plain = build_samples(ds, cfg.sequence_plan(), cfg.max_duration, cfg.feature_dim);
  const auto cold = build_samples(ds, cfg.sequence_plan(), cfg.max_duration, cfg.feature_dim, dir / "cache");
  const auto warm = build_samples(ds, cfg.sequence_plan(), cfg.max_duration, cfg.feature_dim, dir / "cache");
  EXPECT_FALSE(std::filesystem::is_empty(dir / "cache"));
  ASSERT_EQ(plain.size(), warm.size());
  for (std::size_t k = 0; k < plain.size(); ++k) {
    EXPECT_EQ(plain[k].anchors.iou, cold[k].anchors.iou);
    EXPECT_EQ(plain[k].anchors.iou, warm[k].anchors.iou);
    EXPECT_EQ(plain[k].boundary.start, warm[k].boundary.start);
  }
}

}  // namespace
}  // namespace slotprop
