// tests/ctc_test.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fdt/ctc.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fdt/error.h"
#include "fdt/grad_check.h"
#include "oracles.h"

namespace fdt {
namespace {

LogPosteriorGrid Uniform(std::size_t frames, int num_ids) {
  return LogPosteriorGrid(Matrix(frames, num_ids, -std::log(num_ids)));
}

TEST(CollapseTest, Examples) {
  EXPECT_EQ(Collapse({0, 0, 1, 0, 0, 2}), (PieceSeq{1, 2}));
  EXPECT_EQ(Collapse({1, 1, 0, 1}), (PieceSeq{1, 1}));
  EXPECT_TRUE(Collapse({}).empty());
  EXPECT_EQ(MinFramesFor({1, 1, 2}), 4u);
}

TEST(GridTest, RejectsUnnormalizedRows) {
  EXPECT_THROW(LogPosteriorGrid(Matrix(2, 3, 0.0)), Error);
  EXPECT_THROW(LogPosteriorGrid(Matrix(0, 3)), Error);
  EXPECT_NO_THROW(LogPosteriorGrid::Unnormalized(Matrix(2, 3, 0.0)));
  const auto grid = LogPosteriorGrid::FromLogits(Matrix(2, 3, 4.0));
  EXPECT_NEAR(grid(1, 2), -std::log(3.0), 1e-12);
}

TEST(CtcLossTest, HandExamples) {
  EXPECT_NEAR(CtcForwardLoss(Uniform(1, 2), {1}), -std::log(0.5), 1e-12);
  EXPECT_NEAR(CtcForwardLoss(Uniform(2, 2), {1}), -std::log(0.75), 1e-12);
  EXPECT_NEAR(CtcForwardLoss(Uniform(2, 2), {}), -std::log(0.25), 1e-12);
  try {
    CtcForwardLoss(Uniform(2, 3), {1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleLabel);
  }
  EXPECT_THROW(CtcForwardLoss(Uniform(2, 2), {2}), Error);
}

TEST(CtcLossTest, OccupancyExamples) {
  const Matrix g1 = CtcOccupancies(Uniform(1, 2), {1});
  EXPECT_DOUBLE_EQ(g1(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g1(0, 0), 0.0);
  const Matrix g2 = CtcOccupancies(Uniform(2, 2), {1});
  for (int t = 0; t < 2; ++t) {
    EXPECT_NEAR(g2(t, 1), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(g2(t, 0), 1.0 / 3.0, 1e-12);
  }
}

TEST(CtcLossTest, GradientExample) {
  const Matrix g = CtcGradLogits(Uniform(1, 2), {1});
  EXPECT_NEAR(g(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(g(0, 1), -0.5, 1e-12);
}

TEST(CtcLossTest, RandomInstanceAgainstEnumeration) {
  std::mt19937_64 rng(11);
  const auto grid = LogPosteriorGrid::FromLogits(oracle::RandomLogits(rng, 6, 4));
  const auto e = oracle::EnumerateCtc(grid, {1, 2});
  const double p = std::exp(-CtcForwardLoss(grid, {1, 2}));
  EXPECT_NEAR(p / e.prob, 1.0, 1e-10);
}

TEST(CtcLossTest, EnumerationProperties) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 60; ++i) {
    const int vocab = std::uniform_int_distribution<int>(1, 3)(rng);
    const std::size_t frames = std::uniform_int_distribution<int>(1, 6)(rng);
    const PieceSeq label = oracle::RandomLabel(rng, 3, vocab);
    if (MinFramesFor(label) > frames) continue;
    const auto grid =
        LogPosteriorGrid::FromLogits(oracle::RandomLogits(rng, frames, vocab + 1));
    const auto e = oracle::EnumerateCtc(grid, label);
    EXPECT_NEAR(std::exp(-CtcForwardLoss(grid, label)) / e.prob, 1.0, 1e-10);
    const Matrix occ = CtcOccupancies(grid, label);
    for (std::size_t t = 0; t < frames; ++t) {
      double sum = 0.0;
      for (int j = 0; j <= vocab; ++j) {
        EXPECT_NEAR(occ(t, j), e.occupancy(t, j), 1e-10);
        sum += occ(t, j);
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
    const Alignment a = ViterbiAlign(grid, label);
    EXPECT_LE(a.log_prob, std::log(e.prob) + 1e-12);
    if (e.num_paths > 1) EXPECT_LT(a.log_prob, std::log(e.prob));
  }
}

TEST(CtcLossTest, FiniteDifferenceOnLogits) {
  const GradCheckResult r = CheckCtcGradient(3, 40);
  EXPECT_TRUE(r.passed) << r.max_rel_err;
  std::mt19937_64 rng(9);
  const Matrix logits = oracle::RandomLogits(rng, 5, 4);
  const PieceSeq label = {2, 3};
  const Matrix g = CtcGradLogits(LogPosteriorGrid::FromLogits(logits), label);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double fd = CentralDifference(
          [&](const Matrix& x) {
            return CtcForwardLoss(LogPosteriorGrid::FromLogits(x), label);
          },
          logits, t, j);
      EXPECT_LE(RelativeError(g(t, j), fd), 1e-5);
    }
  }
}

TEST(ViterbiTest, WorkedExample) {
  // a and b peak at frames 3 and 6 (1-based), blank elsewhere.
  const Matrix lp = oracle::OneHotLogPosteriors({0, 0, 1, 0, 0, 2}, 3, 1e-3);
  const Alignment a = ViterbiAlign(LogPosteriorGrid(lp), {1, 2});
  EXPECT_EQ(a.tokens, (std::vector<PieceId>{0, 0, 1, 0, 0, 2}));
  EXPECT_EQ(a.emission_frames, (std::vector<std::size_t>{2, 5}));
}

TEST(ViterbiTest, SingleFrame) {
  const Alignment a = ViterbiAlign(Uniform(1, 2), {1});
  EXPECT_EQ(a.tokens, (std::vector<PieceId>{1}));
  EXPECT_EQ(a.emission_frames, (std::vector<std::size_t>{0}));
}

TEST(ViterbiTest, TieRuleOnUniformGrid) {
  // All paths tie; the rule favours early blanks and the label-final state.
  const Alignment a = ViterbiAlign(Uniform(3, 2), {1});
  EXPECT_EQ(a.tokens, (std::vector<PieceId>{0, 0, 1}));
  const Alignment b = ViterbiAlign(Uniform(4, 3), {1, 2});
  EXPECT_EQ(b.tokens, (std::vector<PieceId>{0, 0, 1, 2}));
}

TEST(ViterbiTest, MatchesEnumerationWithTies) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 80; ++i) {
    const int vocab = std::uniform_int_distribution<int>(1, 3)(rng);
    const std::size_t frames = std::uniform_int_distribution<int>(1, 6)(rng);
    const PieceSeq label = oracle::RandomLabel(rng, 3, vocab);
    if (MinFramesFor(label) > frames) continue;
    const Matrix logits = i % 2 ? oracle::TiedLogits(rng, frames, vocab + 1)
                                : oracle::RandomLogits(rng, frames, vocab + 1);
    const auto grid = LogPosteriorGrid::FromLogits(logits);
    const auto e = oracle::EnumerateCtc(grid, label);
    const Alignment a = ViterbiAlign(grid, label);
    EXPECT_EQ(a.tokens, e.best);
    EXPECT_EQ(a.log_prob, e.best_log_prob);
    ASSERT_EQ(a.emission_frames.size(), label.size());
    for (std::size_t k = 1; k < label.size(); ++k) {
      EXPECT_LT(a.emission_frames[k - 1], a.emission_frames[k]);
    }
    EXPECT_EQ(Collapse(a.tokens), label);
  }
}

}  // namespace
}  // namespace fdt
