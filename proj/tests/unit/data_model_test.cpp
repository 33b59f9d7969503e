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

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "slotprop/data_model.hpp"
#include "slotprop/tensor_io.hpp"
#include "test_util.hpp"

namespace slotprop {
namespace {

using testing::TempDir;

TEST(SnippetCount, Examples) {
  EXPECT_EQ(snippet_count(1000, 4), 250);
  EXPECT_EQ(snippet_count(3, 4), 1);
  EXPECT_EQ(snippet_count(400, 16), 25);
  EXPECT_EQ(snippet_count(401, 16), 26);
  EXPECT_THROW(snippet_count(0, 4), InvalidArgument);
  EXPECT_THROW(snippet_count(10, 0), InvalidArgument);
}

SnippetFeatureSequence float_sequence(int L, int C, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  SnippetFeatureSequence seq;
  // Values representable in float32 so the round trip is exact.
  seq.features = oracle::random_matrix(gen, L, C).cast<float>().cast<double>();
  seq.valid_length = L;
  return seq;
}

TEST(FeatureFile, RoundTripIsBitExact) {
  TempDir dir("features");
  const auto seq = float_sequence(250, 2048, 1);
  store_feature_sequence(dir / "a.prsf", seq);
  const auto back = load_feature_sequence(dir / "a.prsf", 250, 2048, {4, 0.16});
  EXPECT_EQ(back.features, seq.features);
  EXPECT_EQ(back.valid_length, 250);
  EXPECT_EQ(back.snippet_interval, 4);
  EXPECT_DOUBLE_EQ(back.time_per_snippet, 0.16);
}

TEST(FeatureFile, HeaderLayout) {
  TempDir dir("header");
  write_feature_file(dir / "h.prsf", Mat::Constant(3, 2, 1.0));
  const std::string bytes = testing::read_file(dir / "h.prsf");
  ASSERT_EQ(bytes.size(), 16u + 3 * 2 * 4);
  EXPECT_EQ(bytes.substr(0, 4), "PRSF");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 0);
  // 1.0f little-endian = 00 00 80 3f
  EXPECT_EQ(static_cast<unsigned char>(bytes[18]), 0x80);
  EXPECT_EQ(static_cast<unsigned char>(bytes[19]), 0x3f);
}

TEST(FeatureFile, TruncatedPayloadRejected) {
  TempDir dir("trunc");
  write_feature_file(dir / "t.prsf", Mat::Ones(10, 3));
  std::string bytes = testing::read_file(dir / "t.prsf");
  bytes.resize(bytes.size() - 3 * 4);  // header says 10 rows, 9 present
  testing::write_file(dir / "t.prsf", bytes);
  EXPECT_THROW(load_feature_sequence(dir / "t.prsf", 0, 0), FormatError);
}

TEST(FeatureFile, EmptyFileRejected) {
  TempDir dir("empty");
  testing::write_file(dir / "e.prsf", "");
  EXPECT_THROW(load_feature_sequence(dir / "e.prsf", 0, 0), FormatError);
}

TEST(FeatureFile, ShapeMismatchRejected) {
  TempDir dir("shape");
  write_feature_file(dir / "s.prsf", Mat::Ones(4, 3));
  EXPECT_THROW(load_feature_sequence(dir / "s.prsf", 5, 3), FormatError);
  EXPECT_THROW(load_feature_sequence(dir / "s.prsf", 4, 2), FormatError);
}

TEST(FeatureFile, NonFiniteRejected) {
  TempDir dir("nan");
  Mat m = Mat::Ones(2, 2);
  std::ofstream out(dir / "n.prsf", std::ios::binary);
  m(1, 1) = std::numeric_limits<double>::infinity();
  write_tensor(out, m);
  out.close();
  EXPECT_THROW(load_feature_sequence(dir / "n.prsf", 0, 0), FormatError);
}

TEST(FeatureFile, MissingFileIsIoError) {
  EXPECT_THROW(load_feature_sequence("/nonexistent/x.prsf", 0, 0), IoError);
}

TEST(TensorArchive, RoundTripFloat64) {
  TempDir dir("archive");
  std::mt19937_64 gen(2);
  TensorArchive a{{"w", oracle::random_matrix(gen, 3, 4)}, {"b", oracle::random_matrix(gen, 1, 4)}};
  save_archive(dir / "a.prsk", a);
  const auto back = load_archive(dir / "a.prsk");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].first, "w");
  EXPECT_EQ(back[0].second, a[0].second);
  EXPECT_EQ(back[1].second, a[1].second);
}

std::vector<int> offsets_of(const std::vector<SnippetFeatureSequence>& w) {
  std::vector<int> o;
  for (const auto& s : w) o.push_back(s.origin_offset);
  return o;
}

TEST(WindowSequence, Examples) {
  auto seq = float_sequence(450, 2, 3);
  auto w = window_sequence(seq, 250, 100);
  EXPECT_EQ(offsets_of(w), (std::vector<int>{0, 100, 200}));
  for (const auto& s : w) EXPECT_EQ(s.length(), 250);
  EXPECT_EQ(w[2].features, seq.features.middleRows(200, 250));

  w = window_sequence(float_sequence(250, 2, 4), 250, 100);
  EXPECT_EQ(offsets_of(w), (std::vector<int>{0}));

  const auto short_seq = float_sequence(120, 2, 5);
  w = window_sequence(short_seq, 250, 100);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].length(), 250);
  EXPECT_EQ(w[0].valid_length, 120);
  EXPECT_EQ(w[0].features.topRows(120), short_seq.features);
  EXPECT_TRUE(w[0].features.bottomRows(130).isZero());
}

TEST(WindowSequence, TailWindowIsEndAligned) {
  const auto w = window_sequence(float_sequence(470, 1, 6), 250, 100);
  EXPECT_EQ(offsets_of(w), (std::vector<int>{0, 100, 200, 220}));
}

TEST(WindowSequence, CoversEveryPositionWithIncreasingOffsets) {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> len(1, 400), win(1, 120), str(1, 120);
  for (int trial = 0; trial < 200; ++trial) {
    const int L = len(gen), W = win(gen), S = std::min(W, str(gen));
    const auto w = window_sequence(float_sequence(L, 1, trial), W, S);
    std::vector<bool> covered(L, false);
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (k > 0) {
        EXPECT_GT(w[k].origin_offset, w[k - 1].origin_offset);
      }
      EXPECT_GE(w[k].origin_offset, 0);
      EXPECT_LE(w[k].origin_offset + std::min(W, L), L);
      for (int i = 0; i < w[k].valid_length; ++i) covered[w[k].origin_offset + i] = true;
    }
    for (int i = 0; i < L; ++i) ASSERT_TRUE(covered[i]) << L << " " << W << " " << S;
  }
}

TEST(WindowSequence, RejectsBadArguments) {
  EXPECT_THROW(window_sequence(float_sequence(10, 1, 1), 0, 1), InvalidArgument);
  EXPECT_THROW(window_sequence(float_sequence(10, 1, 1), 5, 0), InvalidArgument);
  EXPECT_THROW(window_sequence(float_sequence(10, 1, 1), 5, 6), InvalidArgument);
}

TEST(RescaleSequence, Examples) {
  auto seq = float_sequence(100, 3, 8);
  EXPECT_LT((rescale_sequence(seq, 100).features - seq.features).cwiseAbs().maxCoeff(), 1e-15);

  SnippetFeatureSequence abc;
  abc.features.resize(3, 2);
  abc.features << 1, 2, 3, 5, -1, 0;
  abc.valid_length = 3;
  const Mat out = rescale_sequence(abc, 5).features;
  Mat expect(5, 2);
  expect << 1, 2, 2, 3.5, 3, 5, 1, 2.5, -1, 0;
  EXPECT_LT((out - expect).cwiseAbs().maxCoeff(), 1e-15);

  SnippetFeatureSequence one;
  one.features = Mat::Constant(1, 2, 4.0);
  one.valid_length = 1;
  const auto r = rescale_sequence(one, 7);
  EXPECT_EQ(r.length(), 7);
  EXPECT_TRUE((r.features.array() == 4.0).all());
}

TEST(RescaleSequence, ConstantIsExactAndEndpointsMap) {
  std::mt19937_64 gen(9);
  for (int L : {2, 5, 37, 300}) {
    SnippetFeatureSequence c;
    c.features = Mat::Constant(L, 2, 0.3);
    c.valid_length = L;
    EXPECT_TRUE((rescale_sequence(c, 100).features.array() == 0.3).all());
    auto seq = float_sequence(L, 3, L);
    const Mat out = rescale_sequence(seq, 100).features;
    EXPECT_EQ(out.row(0), seq.features.row(0));
    EXPECT_LT((out.row(99) - seq.features.row(L - 1)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Annotations, RoundTrip) {
  TempDir dir("ann");
  AnnotationSet a;
  a["v1"] = VideoRecord{"v1", 12.5, 25.0, 312, {{1.0, 2.5, "x"}, {3.0, 4.0, ""}}};
  a["v2"] = VideoRecord{"v2", 3.0, 30.0, 90, {}};
  write_annotations(dir / "a.json", a);
  const auto b = read_annotations(dir / "a.json");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.at("v1").instances, a.at("v1").instances);
  EXPECT_DOUBLE_EQ(b.at("v1").duration, 12.5);
  EXPECT_DOUBLE_EQ(b.at("v2").fps, 30.0);
}

TEST(Annotations, MalformedJsonIsFormatError) {
  TempDir dir("bad");
  testing::write_file(dir / "a.json", "{\"v\": {\"duration\": ");
  EXPECT_THROW(read_annotations(dir / "a.json"), FormatError);
}

TEST(Dataset, MissingFeatureFilesAreListed) {
  TempDir dir("missing");
  SynthSpec spec;
  spec.n_videos = 3;
  spec.length = 32;
  spec.channels = 4;
  generate_synthetic_dataset(spec, dir.path());
  std::filesystem::remove(dir / "features/synth_0001.prsf");
  std::filesystem::remove(dir / "features/synth_0002.prsf");
  try {
    load_dataset(dir / "manifest.json", dir / "annotations.json", SequenceMode::kWindowed);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("synth_0001.prsf"), std::string::npos) << what;
    EXPECT_NE(what.find("synth_0002.prsf"), std::string::npos) << what;
  }
}

TEST(Synthetic, DeterministicUnderSeed) {
  TempDir a("syn_a"), b("syn_b");
  SynthSpec spec;
  spec.seed = 7;
  generate_synthetic_dataset(spec, a.path());
  generate_synthetic_dataset(spec, b.path());
  for (const char* f : {"annotations.json", "manifest.json", "features/synth_0000.prsf", "features/synth_0019.prsf"})
    EXPECT_EQ(testing::read_file(a / f), testing::read_file(b / f)) << f;
  spec.seed = 8;
  TempDir c("syn_c");
  generate_synthetic_dataset(spec, c.path());
  EXPECT_NE(testing::read_file(a / "features/synth_0000.prsf"), testing::read_file(c / "features/synth_0000.prsf"));
}

TEST(Synthetic, SegmentsWithinBoundsAndDisjoint) {
  TempDir dir("syn_bounds");
  SynthSpec spec;
  spec.seed = 3;
  generate_synthetic_dataset(spec, dir.path());
  const auto ann = read_annotations(dir / "annotations.json");
  ASSERT_EQ(ann.size(), 20u);
  const double tps = spec.snippet_interval / spec.fps;
  for (const auto& [id, rec] : ann) {
    ASSERT_GE(rec.instances.size(), 1u);
    ASSERT_LE(rec.instances.size(), 3u);
    EXPECT_NEAR(rec.duration, 64 * tps, 1e-12);
    for (std::size_t k = 0; k < rec.instances.size(); ++k) {
      EXPECT_GE(rec.instances[k].t_start, 0.0);
      EXPECT_LT(rec.instances[k].t_start, rec.instances[k].t_end);
      EXPECT_LE(rec.instances[k].t_end, 64 * tps + 1e-12);
      if (k > 0) {
        EXPECT_LE(rec.instances[k - 1].t_end, rec.instances[k].t_start);
      }
    }
  }
}

// Recompute the action/background mean gap from the written feature files.
TEST(Synthetic, InsideMeanShiftMatchesOffset) {
  TempDir dir("syn_means");
  SynthSpec spec;
  spec.seed = 11;
  spec.n_videos = 40;
  generate_synthetic_dataset(spec, dir.path());
  const auto ann = read_annotations(dir / "annotations.json");
  const double tps = spec.snippet_interval / spec.fps;
  // The class pattern is +-offset per channel; project onto its sign to get a scalar gap.
  const auto v0 = generate_synthetic_video(spec, 0);
  RowVec sign = RowVec::Zero(spec.channels);
  {
    RowVec in = RowVec::Zero(spec.channels), out = RowVec::Zero(spec.channels);
    int ni = 0, no = 0;
    const auto& inst = ann.at(v0.record.id).instances;
    for (int l = 0; l < spec.length; ++l) {
      bool inside = false;
      for (const auto& g : inst) inside |= (l * tps >= g.t_start && (l + 1) * tps <= g.t_end);
      if (inside) {
        in += v0.features.row(l);
        ++ni;
      } else {
        out += v0.features.row(l);
        ++no;
      }
    }
    sign = (in / ni - out / no).array().sign().matrix();
  }
  double gap_sum = 0.0;
  int videos = 0;
  for (const auto& [id, rec] : ann) {
    const Mat x = read_feature_file(dir / ("features/" + id + ".prsf"));
    double in = 0.0, out = 0.0;
    int ni = 0, no = 0;
    for (int l = 0; l < spec.length; ++l) {
      bool deep_inside = false, far_outside = true;
      for (const auto& g : rec.instances) {
        const double a = l * tps, b = (l + 1) * tps;
        deep_inside |= (a >= g.t_start + tps && b <= g.t_end - tps);
        far_outside &= (b <= g.t_start - tps || a >= g.t_end + tps);
      }
      const double proj = x.row(l).dot(sign) / spec.channels;
      if (deep_inside) {
        in += proj;
        ++ni;
      } else if (far_outside) {
        out += proj;
        ++no;
      }
    }
    if (ni > 0 && no > 0) {
      gap_sum += in / ni - out / no;
      ++videos;
    }
  }
  ASSERT_GT(videos, 30);
  EXPECT_NEAR(gap_sum / videos, spec.action_offset, 0.15);
}

TEST(Synthetic, RejectsUnplaceableAndEmpty) {
  TempDir dir("syn_bad");
  SynthSpec spec;
  spec.length = 4;
  EXPECT_THROW(generate_synthetic_dataset(spec, dir.path()), InvalidArgument);
  spec = SynthSpec{};
  spec.n_videos = 0;
  EXPECT_THROW(generate_synthetic_dataset(spec, dir.path()), InvalidArgument);
}

}  // namespace
}  // namespace slotprop
