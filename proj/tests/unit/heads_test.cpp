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

#include <random>

#include "oracles.hpp"
#include "slotprop/heads.hpp"
#include "slotprop/model.hpp"
#include "test_util.hpp"

namespace slotprop {
namespace {

using oracle::random_matrix;

TEST(BoundaryHead, ZeroParametersGiveHalf) {
  Rng rng(1);
  BoundaryHead head(4, rng);
  head.conv.weight.value.setZero();
  head.conv.bias.value.setZero();
  std::mt19937_64 gen(1);
  const Mat p = head.forward(random_matrix(gen, 11, 4), 11);
  ASSERT_EQ(p.rows(), 11);
  ASSERT_EQ(p.cols(), 2);
  EXPECT_TRUE((p.array() == 0.5).all());
}

TEST(BoundaryHead, LargeStartBiasSaturates) {
  Rng rng(2);
  BoundaryHead head(4, rng);
  head.conv.bias.value(0, 0) = 50.0;
  std::mt19937_64 gen(2);
  const Mat p = head.forward(random_matrix(gen, 7, 4, 0.1), 7);
  EXPECT_GT(p.col(0).minCoeff(), 1.0 - 1e-12);
  EXPECT_LT(p.col(1).maxCoeff(), 1.0);
  EXPECT_GT(p.col(1).minCoeff(), 0.0);
}

TEST(AnchorGrid, Counts) {
  const auto g = anchor_grid(64, 250);
  EXPECT_EQ(g.cells(), 16000);
  long expect = 0;
  for (int d = 1; d <= 64; ++d) expect += 250 - d + 1;
  EXPECT_EQ(g.valid_count(), expect);
  // Anchors with l + d <= L: sum_d (L - d + 1) = 64*250 - sum d + 64 = 13984;
  // the closed form sum_d (L - d) = 13920 counts anchors with l + d < L.
  EXPECT_EQ(64 * 250 - 64 * 65 / 2 + 64, 13984);
  EXPECT_EQ(g.valid_count(), 13984);

  const auto one = anchor_grid(1, 1);
  EXPECT_EQ(one.valid_count(), 1);
  EXPECT_TRUE(one.valid(0, 0));
  const auto g16 = anchor_grid(8, 16);
  EXPECT_FALSE(g16.valid(4, 16 - 3));  // d = 5, l = L - 3
}

/// Direct interpolation at the bin sample points.
Mat reference_alignment(const Mat& u, int D, int bins) {
  const int L = static_cast<int>(u.rows());
  Mat out = Mat::Zero(static_cast<Eigen::Index>(D) * L, u.cols());
  for (int d = 1; d <= D; ++d)
    for (int l = 0; l + d <= L; ++l) {
      RowVec acc = RowVec::Zero(u.cols());
      for (int k = 0; k < bins; ++k) {
        const double x = bins == 1 ? l + 0.5 * (d - 1) : l + (d - 1) * static_cast<double>(k) / (bins - 1);
        const int i0 = static_cast<int>(x);
        const int i1 = std::min(i0 + 1, L - 1);
        const double t = x - i0;
        acc += (1 - t) * u.row(i0) + t * u.row(i1);
      }
      out.row((d - 1) * L + l) = acc / bins;
    }
  return out;
}

TEST(Aligner, MatchesDirectInterpolation) {
  std::mt19937_64 gen(3);
  const Mat u = random_matrix(gen, 12, 5);
  for (int bins : {1, 2, 8, 16}) {
    const Mat f = align_proposal_features(u, 6, bins);
    EXPECT_LT((f - reference_alignment(u, 6, bins)).cwiseAbs().maxCoeff(), 1e-12) << bins;
  }
  // Anchor (d = 4, l = 2), 8 bins: samples at 2 + 3k/7.
  const Mat f = align_proposal_features(u, 6, 8);
  RowVec expect = RowVec::Zero(5);
  for (int k = 0; k < 8; ++k) {
    const double x = 2.0 + 3.0 * k / 7.0;
    const int i = static_cast<int>(x);
    expect += (i + 1 - x) * u.row(i) + (x - i) * u.row(std::min(i + 1, 11));
  }
  EXPECT_LT((f.row(3 * 12 + 2) - expect / 8).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Aligner, ConstantAndLengthOneAnchors) {
  Mat u(10, 3);
  u.rowwise() = RowVec::LinSpaced(3, 1.0, 3.0);
  const Mat f = align_proposal_features(u, 4, 16);
  const auto grid = anchor_grid(4, 10);
  for (int d = 0; d < 4; ++d)
    for (int l = 0; l < 10; ++l) {
      const RowVec row = f.row(d * 10 + l);
      if (grid.valid(d, l)) {
        EXPECT_LT((row - u.row(0)).cwiseAbs().maxCoeff(), 1e-12);
      } else {
        EXPECT_TRUE(row.isZero());
      }
    }
  std::mt19937_64 gen(4);
  const Mat r = random_matrix(gen, 10, 3);
  const Mat g = align_proposal_features(r, 4, 16);
  for (int l = 0; l < 10; ++l) EXPECT_LT((g.row(l) - r.row(l)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Aligner, AffineInTimeGivesMidpointValue) {
  const int L = 20;
  Mat u(L, 2);
  for (int i = 0; i < L; ++i) u.row(i) << 0.5 + 2.0 * i, -1.0 + 0.25 * i;
  for (int bins : {1, 3, 16}) {
    const Mat f = align_proposal_features(u, 8, bins);
    for (int d = 1; d <= 8; ++d)
      for (int l = 0; l + d <= L; ++l) {
        const double mid = l + 0.5 * (d - 1);
        EXPECT_NEAR(f((d - 1) * L + l, 0), 0.5 + 2.0 * mid, 1e-12);
        EXPECT_NEAR(f((d - 1) * L + l, 1), -1.0 + 0.25 * mid, 1e-12);
      }
  }
}

TEST(ConfidenceHead, ZeroParametersGiveHalf) {
  Rng rng(5);
  ConfidenceHead head(4, 128, rng);
  head.visit("h", [](const std::string&, Param& p) { p.value.setZero(); });
  std::mt19937_64 gen(5);
  const Mat p = head.forward(random_matrix(gen, 30, 4));
  EXPECT_TRUE((p.array() == 0.5).all());
}

TEST(ConfidenceHead, AnchorwiseIndependent) {
  Rng rng(6);
  ConfidenceHead head(4, 16, rng);
  std::mt19937_64 gen(6);
  Mat f = random_matrix(gen, 10, 4);
  const Mat p = head.forward(f);
  f.row(2).swap(f.row(7));
  const Mat q = head.forward(f);
  EXPECT_EQ(q(2, 0), p(7, 0));
  EXPECT_EQ(q(7, 0), p(2, 0));
  EXPECT_EQ(q(0, 0), p(0, 0));
  EXPECT_GT(p.minCoeff(), 0.0);
  EXPECT_LT(p.maxCoeff(), 1.0);
}

TEST(ModelOutput, MasksInvalidAndPaddedEntries) {
  ModelConfig cfg;
  cfg.slots.feature_dim = 3;
  cfg.slots.input_dim = cfg.slots.embed_dim = cfg.slots.out_dim = 4;
  cfg.slots.scales = {2};
  cfg.heads.max_duration = 5;
  cfg.heads.hidden = 8;
  SlotProposalModel model(cfg, 7);
  std::mt19937_64 gen(7);
  const Mat x = random_matrix(gen, 2 * 12, 3);
  const ModelOutput out = model.forward(x, 12, false);
  const auto maps = out.confidence_maps(1, 9);
  const auto scores = out.boundary_scores(1, 9);
  EXPECT_EQ(maps.cls.rows(), 5);
  EXPECT_EQ(maps.cls.cols(), 12);
  for (int d = 1; d <= 5; ++d)
    for (int l = 0; l < 12; ++l) {
      const bool valid = l + d <= 9;
      EXPECT_EQ(maps.valid(d - 1, l), valid);
      if (valid) {
        EXPECT_GT(maps.cls(d - 1, l), 0.0);
        EXPECT_LT(maps.com(d - 1, l), 1.0);
      } else {
        EXPECT_EQ(maps.cls(d - 1, l), 0.0);
        EXPECT_EQ(maps.com(d - 1, l), 0.0);
      }
    }
  for (int l = 9; l < 12; ++l) EXPECT_EQ(scores.start(l), 0.0);
  EXPECT_GT(scores.end.head(9).minCoeff(), 0.0);
}

TEST(Model, ExportImportRoundTripAndMismatch) {
  ModelConfig cfg;
  cfg.slots.feature_dim = 3;
  cfg.slots.input_dim = cfg.slots.embed_dim = cfg.slots.out_dim = 4;
  cfg.slots.scales = {2};
  cfg.heads.max_duration = 4;
  cfg.heads.hidden = 8;
  SlotProposalModel a(cfg, 1), b(cfg, 2);
  std::mt19937_64 gen(8);
  testing::randomize_parameters(a, gen);
  b.import_parameters(a.export_parameters());
  const Mat x = random_matrix(gen, 10, 3);
  EXPECT_EQ(a.forward(x, 10, false).cls, b.forward(x, 10, false).cls);

  auto archive = a.export_parameters();
  archive[3].second = Mat::Zero(1, 1);
  const std::string name = archive[3].first;
  try {
    b.import_parameters(archive);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
  }
}

TEST(Model, SameSeedSameInitialization) {
  ModelConfig cfg;
  cfg.slots.feature_dim = 3;
  cfg.slots.input_dim = cfg.slots.embed_dim = cfg.slots.out_dim = 4;
  cfg.slots.scales = {2};
  SlotProposalModel a(cfg, 9), b(cfg, 9), c(cfg, 10);
  const auto ea = a.export_parameters(), eb = b.export_parameters(), ec = c.export_parameters();
  bool any_diff = false;
  for (std::size_t k = 0; k < ea.size(); ++k) {
    EXPECT_EQ(ea[k].second, eb[k].second);
    any_diff |= ea[k].second != ec[k].second;
    if (ea[k].first.find(".bias") != std::string::npos) {
      EXPECT_TRUE(ea[k].second.isZero()) << ea[k].first;
    }
  }
  EXPECT_TRUE(any_diff);
}

}  // namespace
}  // namespace slotprop
