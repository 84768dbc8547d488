// tests/constrained_graph_test.cc

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

#include "fdt/constrained_graph.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "fdt/error.h"
#include "oracles.h"

namespace fdt {
namespace {

LogPosteriorGrid Uniform(std::size_t frames, int num_ids) {
  return LogPosteriorGrid(Matrix(frames, num_ids, -std::log(num_ids)));
}

std::set<std::vector<int>> PathSet(const LogPosteriorGrid& grid,
                                   const PieceSeq& label) {
  const auto e = oracle::EnumerateConstrained(grid, label);
  return {e.token_paths.begin(), e.token_paths.end()};
}

TEST(TransitionModelTest, BlankRule) {
  const ConstrainedWordGraph g = BuildWordGraph({1}, 10);
  EXPECT_NEAR(g.start_log_q(0), std::log(0.1), 1e-15);
  EXPECT_NEAR(g.start_log_q(1), std::log(0.9), 1e-15);
  for (const GraphArc& arc : g.arcs()) {
    if (arc.from == 0 && arc.to == 0) EXPECT_NEAR(arc.log_q, std::log(0.1), 1e-15);
    if (arc.from == 0 && arc.to == 1) EXPECT_NEAR(arc.log_q, std::log(0.9), 1e-15);
  }
  // A single frame still leaves the blank a nonzero entry weight.
  EXPECT_DOUBLE_EQ(TransitionModel(1).blank_stay(), 0.5);
}

TEST(ConstrainedGraphTest, StateCountAndErrors) {
  for (int u = 1; u <= 5; ++u) {
    EXPECT_EQ(BuildWordGraph(PieceSeq(u, 1), 6).num_states(), u + 2);
  }
  EXPECT_EQ(BuildBlankGraph(3).num_states(), 1);
  EXPECT_THROW(BuildWordGraph({}, 3), Error);
  EXPECT_THROW(BuildWordGraph({1, 0}, 3), Error);
  EXPECT_THROW(BuildWordGraph({1, 2, 3}, 2), Error);
}

TEST(ConstrainedGraphTest, PathSets) {
  const auto two = PathSet(Uniform(2, 5), {3, 4});
  EXPECT_EQ(two, (std::set<std::vector<int>>{{3, 4}}));
  const auto three = PathSet(Uniform(3, 3), {1, 2});
  EXPECT_EQ(three, (std::set<std::vector<int>>{
                       {0, 1, 2}, {1, 1, 2}, {1, 2, 2}, {1, 2, 0}}));
}

TEST(ConstrainedGraphTest, HandScores) {
  const LogPosteriorGrid one(Matrix(1, 2, std::log(0.5)));
  EXPECT_NEAR(ConstrainedForwardScore(BuildWordGraph({1}, 1), one),
              std::log(0.5) + std::log(0.5), 1e-12);
  // Single path a b: entry 1/2, then 1/2 to the next piece.
  EXPECT_NEAR(ConstrainedForwardScore(BuildWordGraph({1, 2}, 2), Uniform(2, 3)),
              2 * std::log(1.0 / 3) + std::log(0.5) + std::log(0.5), 1e-12);
}

TEST(ConstrainedGraphTest, ThreePathOccupancy) {
  // Paths: blank a (1/2 * 1/2), a a (1/2 * 1/2), a blank (1/2 * 1/2).
  const Matrix g = ConstrainedOccupancies(BuildWordGraph({1}, 2), Uniform(2, 2));
  for (int t = 0; t < 2; ++t) {
    EXPECT_NEAR(g(t, 1), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(g(t, 0), 1.0 / 3.0, 1e-12);
  }
}

TEST(ConstrainedGraphTest, UniquePathIsOneHot) {
  std::mt19937_64 rng(3);
  const auto grid = LogPosteriorGrid::FromLogits(oracle::RandomLogits(rng, 3, 4));
  const Matrix g = ConstrainedOccupancies(BuildWordGraph({2, 1, 3}, 3), grid);
  const int ids[] = {2, 1, 3};
  for (int t = 0; t < 3; ++t) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(g(t, j), j == ids[t] ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(ConstrainedGraphTest, MatchesEnumeration) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 60; ++i) {
    const int vocab = std::uniform_int_distribution<int>(1, 3)(rng);
    const std::size_t frames = std::uniform_int_distribution<int>(1, 6)(rng);
    const PieceSeq label = oracle::RandomLabel(rng, 3, vocab);
    if (label.size() > frames) continue;
    const auto grid = LogPosteriorGrid::FromLogits(
        oracle::RandomLogits(rng, frames, vocab + 1));
    const auto graph = BuildWordGraph(label, frames);
    const auto e = oracle::EnumerateConstrained(grid, label);
    const ConstrainedLattice lat = ConstrainedForwardBackward(graph, grid);
    EXPECT_NEAR(std::exp(lat.log_score) / e.score, 1.0, 1e-10);
    const Matrix occ = ConstrainedOccupancies(graph, grid);
    for (std::size_t t = 0; t < frames; ++t) {
      for (int j = 0; j <= vocab; ++j) {
        EXPECT_NEAR(occ(t, j), e.occupancy(t, j), 1e-10);
      }
      // Forward and backward agree at every frame.
      double total = kLogZero;
      for (int s = 0; s < graph.num_states(); ++s) {
        total = LogAdd(total, lat.alpha(t, s) + lat.beta(t, s));
      }
      EXPECT_NEAR(total, lat.log_score, 1e-9);
    }
    // No blank ever separates two piece positions.
    for (const auto& path : e.token_paths) {
      std::size_t first = path.size(), last = 0;
      for (std::size_t t = 0; t < path.size(); ++t) {
        if (path[t] != kBlankId) {
          first = std::min(first, t);
          last = t;
        }
      }
      for (std::size_t t = first; t <= last; ++t) EXPECT_NE(path[t], kBlankId);
    }
  }
}

TEST(ConstrainedGraphTest, RaisingOnPathTokenNeverLowersScore) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 30; ++i) {
    // Free potentials: every path weight is monotone in every entry.
    const std::size_t frames = 5;
    const auto graph = BuildWordGraph({1, 2}, frames);
    Matrix x = oracle::RandomLogits(rng, frames, 4);
    const double before =
        ConstrainedForwardScore(graph, LogPosteriorGrid::Unnormalized(x));
    const std::size_t t = std::uniform_int_distribution<int>(0, 4)(rng);
    x(t, std::uniform_int_distribution<int>(0, 2)(rng)) += 0.5;
    EXPECT_GE(ConstrainedForwardScore(graph, LogPosteriorGrid::Unnormalized(x)),
              before);

    // Renormalized rows: holds whenever the path is unique (T = u).
    const PieceSeq label = {2, 1, 3};
    const auto tight = BuildWordGraph(label, 3);
    Matrix logits = oracle::RandomLogits(rng, 3, 4);
    const double tight_before =
        ConstrainedForwardScore(tight, LogPosteriorGrid::FromLogits(logits));
    const std::size_t k = std::uniform_int_distribution<int>(0, 2)(rng);
    logits(k, label[k]) += 0.5;
    EXPECT_GT(ConstrainedForwardScore(tight, LogPosteriorGrid::FromLogits(logits)),
              tight_before);
  }
}

TEST(ConstrainedGraphTest, BlankGraphScore) {
  std::mt19937_64 rng(19);
  const auto grid = LogPosteriorGrid::FromLogits(oracle::RandomLogits(rng, 4, 3));
  EXPECT_NEAR(std::exp(ConstrainedForwardScore(BuildBlankGraph(4), grid)),
              oracle::BlankPathScore(grid), 1e-14);
}

}  // namespace
}  // namespace fdt
