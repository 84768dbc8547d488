// tests/tokenizer_test.cc

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

#include "fdt/tokenizer.h"

#include <gtest/gtest.h>

#include "fdt/error.h"

namespace fdt {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

PieceInventory CallBeethoven() {
  PieceInventory inv;
  inv.vocab = PieceVocab({"<blk>", "ca", "ll", "be", "etho", "ven"});
  inv.lexicon = Lexicon({{"call", {1, 2}}, {"beethoven", {3, 4, 5}}}, inv.vocab);
  return inv;
}

TEST(TokenizerTest, ParsesVocabAndLexicon) {
  const PieceVocab vocab = ParseVocab("<blk>\na\nb\n");
  EXPECT_EQ(vocab.size(), 2);
  EXPECT_EQ(vocab.num_ids(), 3);
  EXPECT_EQ(*vocab.find("a"), 1);
  EXPECT_EQ(*vocab.find("b"), 2);
  const Lexicon lex = ParseLexicon("ab a b\n", vocab);
  ASSERT_NE(lex.find("ab"), nullptr);
  EXPECT_EQ(*lex.find("ab"), (PieceSeq{1, 2}));
}

TEST(TokenizerTest, RejectsBadInventories) {
  EXPECT_EQ(CodeOf([] { ParseVocab("<blk>\na\na\n"); }),
            ErrorCode::kDuplicatePiece);
  const PieceVocab vocab = ParseVocab("<blk>\na\n");
  EXPECT_EQ(CodeOf([&] { ParseLexicon("x <blk>\n", vocab); }),
            ErrorCode::kBlankInLexicon);
  EXPECT_EQ(CodeOf([&] { ParseLexicon("x q\n", vocab); }),
            ErrorCode::kUnknownPiece);
  EXPECT_EQ(CodeOf([&] { ParseLexicon("x\n", vocab); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([&] { Lexicon({{"x", {}}}, vocab); }),
            ErrorCode::kEmptyEntry);
  EXPECT_EQ(CodeOf([] { PieceVocab({"a"}); }), ErrorCode::kParse);
}

TEST(TokenizerTest, LexiconLookup) {
  const PieceInventory inv = CallBeethoven();
  const TokenizedUtterance t =
      Tokenize({"call", "beethoven"}, inv.lexicon, inv.vocab);
  EXPECT_EQ(t.pieces, (PieceSeq{1, 2, 3, 4, 5}));
  ASSERT_EQ(t.word_spans.size(), 2u);
  EXPECT_EQ(t.word_spans[0], (WordSpan{0, 2}));
  EXPECT_EQ(t.word_spans[1], (WordSpan{2, 5}));
}

TEST(TokenizerTest, GreedyLongestMatchForOov) {
  const PieceVocab vocab({"<blk>", "b", "a", "ba"});
  const Lexicon lex({}, vocab);
  EXPECT_EQ(Tokenize({"ba"}, lex, vocab).pieces, (PieceSeq{3}));
  EXPECT_EQ(Tokenize({"bab"}, lex, vocab).pieces, (PieceSeq{3, 1}));
  const PieceVocab small({"<blk>", "b", "a"});
  EXPECT_EQ(CodeOf([&] { Tokenize({"bq"}, Lexicon({}, small), small); }),
            ErrorCode::kUntokenizableWord);
}

TEST(TokenizerTest, Detokenize) {
  const PieceInventory inv = CallBeethoven();
  EXPECT_EQ(Detokenize({1, 2}, {{0, 2}}, inv.vocab),
            std::vector<std::string>{"call"});
  EXPECT_TRUE(Detokenize({1, 2}, {}, inv.vocab).empty());
  EXPECT_EQ(CodeOf([&] { Detokenize({1, 2}, {{0, 3}}, inv.vocab); }),
            ErrorCode::kSpanOutOfRange);
}

TEST(TokenizerTest, PiecesToWordsRoundTrip) {
  const PieceInventory inv = CallBeethoven();
  EXPECT_EQ(PiecesToWords({1, 2, 3, 4, 5}, inv.lexicon, inv.vocab),
            (std::vector<std::string>{"call", "beethoven"}));
  // Pieces outside any entry surface as words of their own.
  EXPECT_EQ(PiecesToWords({3, 1, 2, 5}, inv.lexicon, inv.vocab),
            (std::vector<std::string>{"be", "call", "ven"}));
  EXPECT_TRUE(PiecesToWords({}, inv.lexicon, inv.vocab).empty());
}

TEST(TokenizerTest, SplitAndJoin) {
  EXPECT_EQ(SplitWords("  call\tbeethoven \n"),
            (std::vector<std::string>{"call", "beethoven"}));
  EXPECT_EQ(JoinPieces({1, 2}, CallBeethoven().vocab), "ca ll");
}

}  // namespace
}  // namespace fdt
