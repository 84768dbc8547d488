// core/src/seq_baselines.cc

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

#include "fdt/seq_baselines.h"

#include <algorithm>
#include <cmath>

#include "fdt/error.h"
#include "fdt/log_math.h"

namespace fdt {
namespace {

// Scores taken relative to the best one. A constant added to every score
// cancels before any rounding when the sums are exact, so shifted inputs give
// bit-identical outputs.
struct Relative {
  std::vector<double> shifted;  // s_i - max
  double log_norm = 0.0;        // log sum exp(shifted)
  std::vector<double> posteriors;
};

Relative RelativeScores(const std::vector<double>& log_scores) {
  Relative r;
  const double best = *std::max_element(log_scores.begin(), log_scores.end());
  for (double s : log_scores) r.shifted.push_back(s - best);
  r.log_norm = LogSumExp(r.shifted);
  for (double s : r.shifted) r.posteriors.push_back(std::exp(s - r.log_norm));
  return r;
}

struct ScoredHypothesis {
  Hypothesis hyp;
  Matrix occupancy;
};

// Scores every hypothesis under the current grid, appending the reference if
// it is missing. Hypotheses the grid cannot emit are dropped; the reference
// must be feasible.
std::vector<ScoredHypothesis> ScoreWithReference(const LogPosteriorGrid& grid,
                                                 const PieceSeq& ref,
                                                 const NBestList& nbest,
                                                 std::size_t* ref_index) {
  std::vector<PieceSeq> seqs;
  for (const Hypothesis& h : nbest.hyps) {
    if (std::find(seqs.begin(), seqs.end(), h.pieces) == seqs.end()) {
      seqs.push_back(h.pieces);
    }
  }
  auto it = std::find(seqs.begin(), seqs.end(), ref);
  if (it == seqs.end()) {
    seqs.push_back(ref);
    it = seqs.end() - 1;
  }
  const std::size_t ref_pos = it - seqs.begin();

  std::vector<ScoredHypothesis> out;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    try {
      CtcLossGrad lg = CtcLossAndGrad(grid, seqs[i]);
      if (i == ref_pos) *ref_index = out.size();
      out.push_back({{seqs[i], -lg.loss}, std::move(lg.occupancy)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleLabel || i == ref_pos) throw;
    }
  }
  return out;
}

// grad += weight * d(log P(h | x)) / d(logits) = weight * (gamma_h - p).
void AddScoreGradient(const LogPosteriorGrid& grid, const Matrix& occupancy,
                      double weight, Matrix& grad) {
  if (weight == 0.0) return;
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    for (int j = 0; j < grid.num_ids(); ++j) {
      grad(t, j) += weight * (occupancy(t, j) - std::exp(grid(t, j)));
    }
  }
}

}  // namespace

EditStats& EditStats::operator+=(const EditStats& other) {
  substitutions += other.substitutions;
  insertions += other.insertions;
  deletions += other.deletions;
  ref_len += other.ref_len;
  return *this;
}

EditStats LevenshteinWer(const std::vector<std::string>& ref,
                         const std::vector<std::string>& hyp) {
  if (ref.empty()) throw Error(ErrorCode::kEmptyReference, "WER");
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]);
      d[i][j] = std::min({diag, d[i][j - 1] + 1, d[i - 1][j] + 1});
    }
  }

  EditStats stats;
  stats.ref_len = static_cast<int>(n);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])) {
      if (ref[i - 1] != hyp[j - 1]) ++stats.substitutions;
      --i;
      --j;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      ++stats.insertions;
      --j;
    } else {
      ++stats.deletions;
      --i;
    }
  }
  return stats;
}

MwerScores MwerFromScores(const std::vector<double>& log_scores,
                          const std::vector<double>& errors) {
  if (log_scores.size() != errors.size() || log_scores.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "MWER scores and errors");
  }
  MwerScores out;
  out.posteriors = RelativeScores(log_scores).posteriors;
  // Centred on the first count so equal counts give an exact zero gradient.
  double mean = errors[0];
  for (std::size_t i = 0; i < errors.size(); ++i) {
    mean += out.posteriors[i] * (errors[i] - errors[0]);
  }
  out.loss = mean;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    out.grad_scores.push_back(out.posteriors[i] * (errors[i] - mean));
  }
  return out;
}

SequenceLossGrad MwerLossGrad(const LogPosteriorGrid& grid,
                              const TokenizedUtterance& ref,
                              const NBestList& nbest,
                              const PieceInventory& inventory) {
  std::size_t ref_index = 0;
  const std::vector<ScoredHypothesis> scored =
      ScoreWithReference(grid, ref.pieces, nbest, &ref_index);
  std::vector<double> scores, errors;
  for (const ScoredHypothesis& s : scored) {
    scores.push_back(s.hyp.log_score);
    const auto words =
        PiecesToWords(s.hyp.pieces, inventory.lexicon, inventory.vocab);
    errors.push_back(LevenshteinWer(ref.words, words).errors());
  }
  const MwerScores m = MwerFromScores(scores, errors);

  SequenceLossGrad out;
  out.loss = m.loss;
  out.grad_logits = Matrix(grid.frames(), grid.num_ids());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    AddScoreGradient(grid, scored[i].occupancy, m.grad_scores[i],
                     out.grad_logits);
    out.hyps.push_back(scored[i].hyp);
  }
  out.posteriors = m.posteriors;
  return out;
}

MmiScores MmiFromScores(const std::vector<double>& log_scores,
                        std::size_t ref_index) {
  if (ref_index >= log_scores.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "MMI reference index");
  }
  MmiScores out;
  const Relative rel = RelativeScores(log_scores);
  out.loss = rel.log_norm - rel.shifted[ref_index];
  out.posteriors = rel.posteriors;
  for (std::size_t i = 0; i < log_scores.size(); ++i) {
    out.grad_scores.push_back(out.posteriors[i] - (i == ref_index ? 1.0 : 0.0));
  }
  return out;
}

SequenceLossGrad MmiLossGrad(const LogPosteriorGrid& grid,
                             const TokenizedUtterance& ref,
                             const NBestList& nbest) {
  std::size_t ref_index = 0;
  const std::vector<ScoredHypothesis> scored =
      ScoreWithReference(grid, ref.pieces, nbest, &ref_index);
  std::vector<double> scores;
  for (const ScoredHypothesis& s : scored) scores.push_back(s.hyp.log_score);
  const MmiScores m = MmiFromScores(scores, ref_index);

  SequenceLossGrad out;
  out.loss = m.loss;
  out.grad_logits = Matrix(grid.frames(), grid.num_ids());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    AddScoreGradient(grid, scored[i].occupancy, m.grad_scores[i],
                     out.grad_logits);
    out.hyps.push_back(scored[i].hyp);
  }
  out.posteriors = m.posteriors;
  return out;
}

}  // namespace fdt
