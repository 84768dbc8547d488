// core/src/tokenizer.cc

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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fdt/error.h"
#include "fdt/matrix_container.h"

namespace fdt {
namespace {

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

bool HasSpace(std::string_view s) {
  return s.find_first_of(" \t") != std::string_view::npos;
}

}  // namespace

PieceVocab::PieceVocab(std::vector<std::string> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty() || pieces_[0] != kBlankString) {
    throw Error(ErrorCode::kParse, "vocab line 0 must be <blk>");
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const std::string& p = pieces_[i];
    if (p.empty() || HasSpace(p)) {
      throw Error(ErrorCode::kParse,
                  "invalid piece on vocab line " + std::to_string(i));
    }
    if (!index_.emplace(p, static_cast<PieceId>(i)).second) {
      throw Error(ErrorCode::kDuplicatePiece, p);
    }
  }
}

const std::string& PieceVocab::piece(PieceId id) const {
  if (id < 0 || id >= num_ids()) {
    throw Error(ErrorCode::kInvalidLabel, "piece id " + std::to_string(id));
  }
  return pieces_[id];
}

std::optional<PieceId> PieceVocab::find(std::string_view piece) const {
  auto it = index_.find(piece);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Lexicon::Lexicon(std::map<std::string, PieceSeq> entries,
                 const PieceVocab& vocab) {
  for (auto& [word, pieces] : entries) {
    if (pieces.empty()) throw Error(ErrorCode::kEmptyEntry, word);
    for (PieceId id : pieces) {
      if (id == kBlankId) throw Error(ErrorCode::kBlankInLexicon, word);
      if (id < 0 || id > vocab.size()) {
        throw Error(ErrorCode::kUnknownPiece, word);
      }
    }
    max_entry_length_ = std::max(max_entry_length_, pieces.size());
    reverse_.emplace(pieces, word);  // keeps the first word in key order
    entries_.emplace(word, std::move(pieces));
  }
}

const PieceSeq* Lexicon::find(std::string_view word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

const std::string* Lexicon::word_for(const PieceSeq& pieces) const {
  auto it = reverse_.find(pieces);
  return it == reverse_.end() ? nullptr : &it->second;
}

PieceVocab ParseVocab(std::string_view text) {
  std::vector<std::string> pieces;
  for (std::string_view line : SplitLines(text)) pieces.emplace_back(line);
  while (!pieces.empty() && pieces.back().empty()) pieces.pop_back();
  return PieceVocab(std::move(pieces));
}

Lexicon ParseLexicon(std::string_view text, const PieceVocab& vocab) {
  std::map<std::string, PieceSeq> entries;
  int line_no = 0;
  for (std::string_view line : SplitLines(text)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t tab = line.find_first_of(" \t");
    if (tab == std::string_view::npos || tab == 0) {
      throw Error(ErrorCode::kParse,
                  "lexicon line " + std::to_string(line_no) + " has no word");
    }
    std::string word(line.substr(0, tab));
    PieceSeq pieces;
    std::istringstream rest{std::string(line.substr(tab + 1))};
    std::string piece;
    while (rest >> piece) {
      if (piece == kBlankString) throw Error(ErrorCode::kBlankInLexicon, word);
      auto id = vocab.find(piece);
      if (!id) throw Error(ErrorCode::kUnknownPiece, word + " -> " + piece);
      pieces.push_back(*id);
    }
    if (pieces.empty()) throw Error(ErrorCode::kEmptyEntry, word);
    if (!entries.emplace(word, std::move(pieces)).second) {
      throw Error(ErrorCode::kParse, "duplicate lexicon word " + word);
    }
  }
  return Lexicon(std::move(entries), vocab);
}

PieceInventory LoadLexicon(const std::filesystem::path& vocab_file,
                           const std::filesystem::path& lexicon_file) {
  PieceInventory inv;
  inv.vocab = ParseVocab(ReadFileBytes(vocab_file));
  inv.lexicon = ParseLexicon(ReadFileBytes(lexicon_file), inv.vocab);
  return inv;
}

void WriteVocab(const PieceVocab& vocab, const std::filesystem::path& file) {
  std::string out;
  for (const std::string& p : vocab.pieces()) out += p + "\n";
  WriteFileBytes(file, out);
}

void WriteLexicon(const Lexicon& lexicon, const PieceVocab& vocab,
                  const std::filesystem::path& file) {
  std::string out;
  for (const auto& [word, pieces] : lexicon.entries()) {
    out += word + "\t" + JoinPieces(pieces, vocab) + "\n";
  }
  WriteFileBytes(file, out);
}

TokenizedUtterance Tokenize(const std::vector<std::string>& words,
                            const Lexicon& lexicon, const PieceVocab& vocab) {
  std::size_t max_piece_len = 0;
  for (const std::string& p : vocab.pieces()) {
    max_piece_len = std::max(max_piece_len, p.size());
  }

  TokenizedUtterance out;
  out.words = words;
  for (const std::string& word : words) {
    WordSpan span{out.pieces.size(), out.pieces.size()};
    if (const PieceSeq* entry = lexicon.find(word)) {
      out.pieces.insert(out.pieces.end(), entry->begin(), entry->end());
    } else {
      std::size_t pos = 0;
      while (pos < word.size()) {
        std::size_t len = std::min(max_piece_len, word.size() - pos);
        std::optional<PieceId> id;
        for (; len > 0; --len) {
          id = vocab.find(std::string_view(word).substr(pos, len));
          if (id && *id != kBlankId) break;
          id.reset();
        }
        if (!id) throw Error(ErrorCode::kUntokenizableWord, word);
        out.pieces.push_back(*id);
        pos += len;
      }
      if (word.empty()) throw Error(ErrorCode::kUntokenizableWord, "<empty>");
    }
    span.end = out.pieces.size();
    out.word_spans.push_back(span);
  }
  return out;
}

std::vector<std::string> Detokenize(const PieceSeq& pieces,
                                    const std::vector<WordSpan>& spans,
                                    const PieceVocab& vocab) {
  std::vector<std::string> words;
  words.reserve(spans.size());
  for (const WordSpan& span : spans) {
    if (span.begin > span.end || span.end > pieces.size()) {
      throw Error(ErrorCode::kSpanOutOfRange,
                  "[" + std::to_string(span.begin) + ", " +
                      std::to_string(span.end) + ") on " +
                      std::to_string(pieces.size()) + " pieces");
    }
    std::string word;
    for (std::size_t i = span.begin; i < span.end; ++i) {
      word += vocab.piece(pieces[i]);
    }
    words.push_back(std::move(word));
  }
  return words;
}

std::vector<std::string> PiecesToWords(const PieceSeq& pieces,
                                       const Lexicon& lexicon,
                                       const PieceVocab& vocab) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < pieces.size()) {
    std::size_t len = std::min(lexicon.max_entry_length(), pieces.size() - pos);
    const std::string* word = nullptr;
    for (; len > 0; --len) {
      PieceSeq candidate(pieces.begin() + pos, pieces.begin() + pos + len);
      word = lexicon.word_for(candidate);
      if (word) break;
    }
    if (word) {
      words.push_back(*word);
      pos += len;
    } else {
      words.push_back(vocab.piece(pieces[pos]));
      ++pos;
    }
  }
  return words;
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string JoinPieces(const PieceSeq& pieces, const PieceVocab& vocab) {
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i) out += ' ';
    out += vocab.piece(pieces[i]);
  }
  return out;
}

}  // namespace fdt
