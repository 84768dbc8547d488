// tests/evaluate_test.cc

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

#include "fdt/evaluate.h"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.h"

namespace fdt {
namespace {

PieceInventory Inventory() {
  PieceInventory inv;
  inv.vocab = PieceVocab({"<blk>", "ca", "ll", "be"});
  inv.lexicon = Lexicon({{"call", {1, 2}}, {"be", {3}}}, inv.vocab);
  return inv;
}

Utterance Utt(const std::vector<std::string>& words) {
  const PieceInventory inv = Inventory();
  Utterance u;
  u.ref = Tokenize(words, inv.lexicon, inv.vocab);
  return u;
}

TEST(EvaluateTest, PerfectGridsScoreZero) {
  const std::vector<Utterance> utts = {Utt({"call", "be"}), Utt({"be"})};
  const std::vector<LogPosteriorGrid> grids = {
      LogPosteriorGrid(oracle::OneHotLogPosteriors({0, 1, 2, 0, 3}, 4)),
      LogPosteriorGrid(oracle::OneHotLogPosteriors({3, 0}, 4))};
  const WerReport r = EvaluateGrids(utts, grids, Inventory(), 8, 1);
  EXPECT_EQ(r.utterances, 2);
  EXPECT_EQ(r.stats.ref_len, 3);
  EXPECT_EQ(r.wer(), 0.0);
  EXPECT_EQ(r.hyp_words[0], (std::vector<std::string>{"call", "be"}));
}

TEST(EvaluateTest, EmptyHypothesesAreAllDeletions) {
  const std::vector<Utterance> utts = {Utt({"call", "be"}), Utt({"be"})};
  const WerReport r = ScoreTranscripts(utts, {{}, {}}, Inventory());
  EXPECT_EQ(r.stats.deletions, 3);
  EXPECT_DOUBLE_EQ(r.wer(), 1.0);
}

TEST(EntropyTest, UniformAndOneHot) {
  const double uniform[] = {std::log(1.0 / 3), std::log(1.0 / 3), std::log(1.0 / 3)};
  EXPECT_NEAR(FrameEntropy(uniform), std::log(3.0), 1e-12);
  const double onehot[] = {0.0, -INFINITY, -INFINITY};
  EXPECT_EQ(FrameEntropy(onehot), 0.0);

  const std::vector<LogPosteriorGrid> grids = {
      LogPosteriorGrid(Matrix(4, 3, -std::log(3.0)))};
  const EntropyReport r = EntropyOfGrids(grids, 4);
  EXPECT_NEAR(r.mean, std::log(3.0), 1e-12);
  EXPECT_EQ(r.frames, 4);
  ASSERT_EQ(r.bin_edges.size(), 5u);
  EXPECT_NEAR(r.bin_edges.back(), std::log(3.0), 1e-12);
  EXPECT_EQ(r.counts.back(), 4);
}

TEST(EvaluateTest, Werr) {
  EXPECT_DOUBLE_EQ(Werr(0.2, 0.15), 0.25);
  EXPECT_DOUBLE_EQ(Werr(0.2, 0.2), 0.0);
  EXPECT_LT(Werr(0.1, 0.2), 0.0);
}

}  // namespace
}  // namespace fdt
