// core/src/nbest.cc

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

#include "fdt/nbest.h"

#include <algorithm>
#include <map>

#include "fdt/error.h"
#include "fdt/log_math.h"

namespace fdt {
namespace {

struct PrefixScore {
  double blank = kLogZero;      // paths ending in blank
  double non_blank = kLogZero;  // paths ending in the prefix's last piece
  double total() const { return LogAdd(blank, non_blank); }
};

using Beam = std::map<PieceSeq, PrefixScore>;

std::vector<Hypothesis> Ranked(const Beam& beam) {
  std::vector<Hypothesis> out;
  out.reserve(beam.size());
  for (const auto& [prefix, score] : beam) {
    // A repeat reached only without a separating blank has no mass yet.
    if (score.total() == kLogZero) continue;
    out.push_back({prefix, score.total()});
  }
  std::sort(out.begin(), out.end(), RanksBefore);
  return out;
}

}  // namespace

bool RanksBefore(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_score != b.log_score) return a.log_score > b.log_score;
  if (a.pieces.size() != b.pieces.size()) {
    return a.pieces.size() < b.pieces.size();
  }
  return a.pieces < b.pieces;
}

std::vector<Hypothesis> PrefixBeamSearch(const LogPosteriorGrid& grid,
                                         int beam, int n) {
  if (n < 1 || beam < n) {
    throw Error(ErrorCode::kConfig, "prefix beam search needs beam >= n >= 1");
  }
  Beam current;
  current[{}].blank = 0.0;
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    Beam next;
    for (const auto& [prefix, score] : current) {
      const double total = score.total();
      PrefixScore& same = next[prefix];
      same.blank = LogAdd(same.blank, total + grid(t, kBlankId));
      for (PieceId c = 1; c <= grid.vocab_size(); ++c) {
        const double lp = grid(t, c);
        if (lp == kLogZero) continue;
        PieceSeq extended = prefix;
        extended.push_back(c);
        if (!prefix.empty() && prefix.back() == c) {
          // Repeat without a blank merges into the same prefix.
          PrefixScore& merged = next[prefix];
          merged.non_blank = LogAdd(merged.non_blank, score.non_blank + lp);
          PrefixScore& ext = next[extended];
          ext.non_blank = LogAdd(ext.non_blank, score.blank + lp);
        } else {
          PrefixScore& ext = next[extended];
          ext.non_blank = LogAdd(ext.non_blank, total + lp);
        }
      }
    }
    {
      std::vector<Hypothesis> ranked = Ranked(next);
      if (static_cast<int>(ranked.size()) > beam) ranked.resize(beam);
      Beam pruned;
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        pruned.emplace(ranked[i].pieces, next.at(ranked[i].pieces));
      }
      next = std::move(pruned);
    }
    current = std::move(next);
  }
  std::vector<Hypothesis> ranked = Ranked(current);
  if (static_cast<int>(ranked.size()) > n) ranked.resize(n);
  return ranked;
}

NBestList NBestPosteriors(std::vector<Hypothesis> hyps) {
  if (hyps.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "empty hypothesis list");
  }
  std::vector<double> scores;
  scores.reserve(hyps.size());
  for (const Hypothesis& h : hyps) scores.push_back(h.log_score);
  const double norm = LogSumExp(scores);
  NBestList out;
  out.posteriors.reserve(hyps.size());
  for (double s : scores) {
    out.posteriors.push_back(norm == kLogZero ? 1.0 / scores.size()
                                              : std::exp(s - norm));
  }
  out.hyps = std::move(hyps);
  return out;
}

}  // namespace fdt
