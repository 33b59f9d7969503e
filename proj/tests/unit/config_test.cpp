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

#include "slotprop/config.hpp"
#include "test_util.hpp"

namespace slotprop {
namespace {

TEST(RunConfig, ThumosDefaults) {
  const RunConfig c = RunConfig::profile("thumos");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.snippet_interval, 4);
  EXPECT_EQ(c.temporal_length, 250);
  EXPECT_EQ(c.window_stride, 100);
  EXPECT_EQ(c.max_duration, 64);
  EXPECT_EQ(c.nms_threshold, 0.65);
  EXPECT_EQ(c.scales, (std::vector<int>{4, 8}));
  EXPECT_EQ(c.iterations, 2);
  EXPECT_EQ(c.embed_dim, 256);
  EXPECT_EQ(c.lambda_norm, 0.0002);
  EXPECT_EQ(c.lambda_com, 10.0);
  EXPECT_EQ(c.lr_schedule, (std::vector<LrSegment>{{2e-4, 0}}));
  EXPECT_EQ(c.epochs, 10);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, AnetProfile) {
  const RunConfig c = RunConfig::profile("anet");
  EXPECT_EQ(c.mode, SequenceMode::kRescaled);
  EXPECT_EQ(c.snippet_interval, 16);
  EXPECT_EQ(c.temporal_length, 100);
  EXPECT_EQ(c.max_duration, 100);
  EXPECT_EQ(c.nms_threshold, 0.45);
  EXPECT_EQ(c.lr_schedule, (std::vector<LrSegment>{{1e-3, 7}, {1e-4, 3}}));
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(RunConfig::profile("kinetics"), InvalidArgument);
}

TEST(RunConfig, RoundTripThroughText) {
  for (const char* name : {"thumos", "anet"}) {
    RunConfig c = RunConfig::profile(name);
    EXPECT_EQ(parse_config(render_config(c)), c) << name;
    c.set("scales", "2,3,5");
    c.set("attention_variant", "similarity");
    c.set("fusion", "sum");
    c.set("softmax_axis", "target");
    c.set("residual", "true");
    c.set("lambda_norm", "0.1");
    c.set("soft_nms_sigma", "0.3");
    c.set("soft_nms_hard_threshold", "0.8");
    c.set("suppress", "soft_nms");
    c.set("candidate_rule", "and");
    c.set("lr_schedule", "0.001:3,0.0003:2,1e-5");
    c.set("seed", "18446744073709551615");
    c.set("bn_momentum", "0.123456789012345");
    const RunConfig back = parse_config(render_config(c));
    EXPECT_EQ(back, c) << render_config(c);
    testing::TempDir dir("cfg");
    save_config(dir / "c.cfg", c);
    EXPECT_EQ(load_config(dir / "c.cfg"), c);
  }
}

TEST(RunConfig, UnknownKeyAndBadValuesRejected) {
  RunConfig c;
  EXPECT_THROW(c.set("no_such_key", "1"), InvalidArgument);
  EXPECT_THROW(c.set("epochs", "ten"), InvalidArgument);
  EXPECT_THROW(c.set("fusion", "max"), InvalidArgument);
  EXPECT_THROW(c.set("scales", "4,x"), InvalidArgument);
  EXPECT_THROW(parse_config("temporal_length = 64\nbogus = 1\n"), InvalidArgument);
  EXPECT_THROW(parse_config("temporal_length 64\n"), InvalidArgument);
}

TEST(RunConfig, ProfileMustComeFirstAndCommentsIgnored) {
  EXPECT_THROW(parse_config("epochs = 3\nprofile = anet\n"), InvalidArgument);
  const RunConfig c = parse_config("# desk run\nprofile = anet  # rescaled\n\nepochs = 3\n");
  EXPECT_EQ(c.mode, SequenceMode::kRescaled);
  EXPECT_EQ(c.epochs, 3);
}

TEST(RunConfig, ValidationCatchesInconsistentValues) {
  RunConfig c;
  c.scales = {4, 250};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.max_duration = 300;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.window_stride = 300;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = RunConfig{};
  c.jobs = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(RunConfig, ConvertersCarryValues) {
  RunConfig c = parse_config(testing::read_file(std::filesystem::path(SLOTPROP_CONFIG_DIR) / "synthetic.cfg"));
  const auto m = c.model_config();
  EXPECT_EQ(m.slots.scales, (std::vector<int>{2, 4}));
  EXPECT_EQ(m.heads.max_duration, 16);
  const auto t = c.train_config();
  EXPECT_EQ(t.epochs, 200);
  EXPECT_EQ(t.batch_size, 4);
  const auto e = c.eval_config();
  EXPECT_EQ(e.an_values, (std::vector<int>{1, 5, 10, 20, 50, 100}));
  EXPECT_EQ(e.tiou_set.size(), 11u);
  const auto s = c.synth_spec();
  EXPECT_EQ(s.length, 64);
  EXPECT_EQ(s.channels, 32);
}

}  // namespace
}  // namespace slotprop
