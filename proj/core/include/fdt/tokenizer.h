// core/include/fdt/tokenizer.h

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

#ifndef FDT_TOKENIZER_H_
#define FDT_TOKENIZER_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fdt {

using PieceId = int;
using PieceSeq = std::vector<PieceId>;

inline constexpr PieceId kBlankId = 0;
inline constexpr std::string_view kBlankString = "<blk>";

// Word-piece inventory. Id 0 is the blank; real pieces are 1..V.
class PieceVocab {
 public:
  PieceVocab() = default;
  // `pieces[0]` must be "<blk>". Throws kDuplicatePiece / kParse.
  explicit PieceVocab(std::vector<std::string> pieces);

  // Number of non-blank pieces (V).
  int size() const { return static_cast<int>(pieces_.size()) - 1; }
  // V + 1, the width of a posterior row.
  int num_ids() const { return static_cast<int>(pieces_.size()); }

  const std::string& piece(PieceId id) const;
  std::optional<PieceId> find(std::string_view piece) const;
  const std::vector<std::string>& pieces() const { return pieces_; }

 private:
  std::vector<std::string> pieces_;
  std::map<std::string, PieceId, std::less<>> index_;
};

// Deterministic word -> piece sequence mapping.
class Lexicon {
 public:
  Lexicon() = default;
  // Validates every entry against `vocab`.
  Lexicon(std::map<std::string, PieceSeq> entries, const PieceVocab& vocab);

  const PieceSeq* find(std::string_view word) const;
  // First word (in key order) spelled by exactly `pieces`, if any.
  const std::string* word_for(const PieceSeq& pieces) const;
  std::size_t max_entry_length() const { return max_entry_length_; }
  const std::map<std::string, PieceSeq, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, PieceSeq, std::less<>> entries_;
  std::map<PieceSeq, std::string> reverse_;
  std::size_t max_entry_length_ = 0;
};

// Half-open piece index range of one word.
struct WordSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const WordSpan&) const = default;
};

struct TokenizedUtterance {
  std::vector<std::string> words;
  PieceSeq pieces;
  std::vector<WordSpan> word_spans;
};

struct PieceInventory {
  PieceVocab vocab;
  Lexicon lexicon;
};

PieceInventory LoadLexicon(const std::filesystem::path& vocab_file,
                           const std::filesystem::path& lexicon_file);
PieceVocab ParseVocab(std::string_view text);
Lexicon ParseLexicon(std::string_view text, const PieceVocab& vocab);

void WriteVocab(const PieceVocab& vocab, const std::filesystem::path& file);
void WriteLexicon(const Lexicon& lexicon, const PieceVocab& vocab,
                  const std::filesystem::path& file);

// Lexicon words map verbatim; other words fall back to greedy longest match
// over the piece strings. Throws kUntokenizableWord.
TokenizedUtterance Tokenize(const std::vector<std::string>& words,
                            const Lexicon& lexicon, const PieceVocab& vocab);

std::vector<std::string> Detokenize(const PieceSeq& pieces,
                                    const std::vector<WordSpan>& spans,
                                    const PieceVocab& vocab);

// Recovers words from a bare piece sequence (decoder output has no word
// boundaries): greedy longest match against lexicon entries; a piece that
// starts no entry becomes a word of its own.
std::vector<std::string> PiecesToWords(const PieceSeq& pieces,
                                       const Lexicon& lexicon,
                                       const PieceVocab& vocab);

std::vector<std::string> SplitWords(std::string_view text);
std::string JoinPieces(const PieceSeq& pieces, const PieceVocab& vocab);

}  // namespace fdt

#endif  // FDT_TOKENIZER_H_
