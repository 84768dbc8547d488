// tests/oracles.h

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

// Brute-force reference implementations used only by the tests. Each one
// enumerates the full path or script space, so keep instances tiny.

#ifndef FDT_TESTS_ORACLES_H_
#define FDT_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fdt/ctc.h"
#include "fdt/log_math.h"
#include "fdt/matrix.h"
#include "fdt/nbest.h"
#include "fdt/tokenizer.h"

namespace fdt::oracle {

// Calls f on every sequence in {0..base-1}^length.
inline void ForEachSequence(int base, std::size_t length,
                            const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> seq(length, 0);
  while (true) {
    f(seq);
    std::size_t i = 0;
    while (i < length && ++seq[i] == base) seq[i++] = 0;
    if (i == length) return;
  }
}

// Left-to-right sum, the same accumulation order the DP uses.
inline double PathLogProb(const LogPosteriorGrid& grid,
                          const std::vector<int>& tokens) {
  double s = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) s += grid(t, tokens[t]);
  return s;
}

// State index of each frame on the blank-interleaved 2U+1 graph.
inline std::vector<int> CtcStates(const std::vector<int>& tokens) {
  std::vector<int> states;
  int emitted = 0;
  int prev = kBlankId;
  for (int tok : tokens) {
    if (tok != kBlankId && tok != prev) ++emitted;
    states.push_back(tok == kBlankId ? 2 * emitted : 2 * emitted - 1);
    prev = tok;
  }
  return states;
}

struct CtcEnumeration {
  double prob = 0.0;
  Matrix occupancy;          // T x (V + 1), normalized
  std::vector<int> best;     // Viterbi tokens under the tie rule
  double best_log_prob = -std::numeric_limits<double>::infinity();
  int num_paths = 0;
};

// Sums every token sequence that collapses to `labels`. Among equally
// probable best paths, picks the one whose state sequence is smallest when
// compared from the last frame backwards.
inline CtcEnumeration EnumerateCtc(const LogPosteriorGrid& grid,
                                   const PieceSeq& labels) {
  CtcEnumeration out;
  out.occupancy = Matrix(grid.frames(), grid.num_ids());
  std::vector<int> best_states;
  ForEachSequence(grid.num_ids(), grid.frames(), [&](const std::vector<int>& z) {
    if (Collapse(z) != labels) return;
    ++out.num_paths;
    const double lp = PathLogProb(grid, z);
    const double p = std::exp(lp);
    out.prob += p;
    for (std::size_t t = 0; t < z.size(); ++t) out.occupancy(t, z[t]) += p;
    std::vector<int> states = CtcStates(z);
    std::reverse(states.begin(), states.end());
    if (lp > out.best_log_prob ||
        (lp == out.best_log_prob && states < best_states)) {
      out.best_log_prob = lp;
      out.best = z;
      best_states = states;
    }
  });
  if (out.prob > 0.0) {
    for (double& v : out.occupancy.values()) v /= out.prob;
  }
  return out;
}

// Constrained word model written out from its rules rather than from the
// graph builder: states 0 (blank), 1..u (pieces), u+1 (blank); horizon
// H = max(T, 2).
inline double ConstrainedStartQ(int s, int u, std::size_t frames) {
  const double h = std::max<double>(frames, 2);
  if (s == 0) return 1.0 / h;
  if (s == 1) return (h - 1.0) / h;
  (void)u;
  return 0.0;
}

inline double ConstrainedArcQ(int from, int to, int u, std::size_t frames) {
  const double h = std::max<double>(frames, 2);
  if (from == 0) return to == 0 ? 1.0 / h : to == 1 ? (h - 1.0) / h : 0.0;
  if (from == u + 1) return to == u + 1 ? 1.0 : 0.0;
  return (to == from || to == from + 1) ? 0.5 : 0.0;
}

struct ConstrainedEnumeration {
  double score = 0.0;  // Q, unnormalized
  Matrix occupancy;    // T x (V + 1)
  std::vector<std::vector<int>> token_paths;  // every path with weight > 0
};

inline ConstrainedEnumeration EnumerateConstrained(const LogPosteriorGrid& grid,
                                                   const PieceSeq& label) {
  const int u = static_cast<int>(label.size());
  const std::size_t T = grid.frames();
  ConstrainedEnumeration out;
  out.occupancy = Matrix(T, grid.num_ids());
  auto id_of = [&](int s) { return (s == 0 || s == u + 1) ? 0 : label[s - 1]; };
  ForEachSequence(u + 2, T, [&](const std::vector<int>& z) {
    if (z.back() != u && z.back() != u + 1) return;
    double w = ConstrainedStartQ(z[0], u, T);
    for (std::size_t t = 1; t < T && w > 0.0; ++t) {
      w *= ConstrainedArcQ(z[t - 1], z[t], u, T);
    }
    if (w == 0.0) return;
    std::vector<int> tokens;
    double p = w;
    for (std::size_t t = 0; t < T; ++t) {
      tokens.push_back(id_of(z[t]));
      p *= std::exp(grid(t, id_of(z[t])));
    }
    out.token_paths.push_back(tokens);
    out.score += p;
    for (std::size_t t = 0; t < T; ++t) out.occupancy(t, tokens[t]) += p;
  });
  if (out.score > 0.0) {
    for (double& v : out.occupancy.values()) v /= out.score;
  }
  return out;
}

// Blank-only competitor: every frame blank, unit transition weights.
inline double BlankPathScore(const LogPosteriorGrid& grid) {
  double p = 1.0;
  for (std::size_t t = 0; t < grid.frames(); ++t) p *= std::exp(grid(t, 0));
  return p;
}

// Every non-empty label sequence over ids 1..V of length <= max_len.
inline std::vector<PieceSeq> AllLabels(int vocab, std::size_t max_len) {
  std::vector<PieceSeq> out;
  for (std::size_t len = 1; len <= max_len; ++len) {
    ForEachSequence(vocab, len, [&](const std::vector<int>& z) {
      PieceSeq l;
      for (int v : z) l.push_back(v + 1);
      out.push_back(l);
    });
  }
  return out;
}

// True top hypotheses: every collapsed sequence up to length T, scored by the
// summed CTC path probability and ranked by the decoder's tie rule.
inline std::vector<Hypothesis> ExactNBest(const LogPosteriorGrid& grid, int n) {
  std::map<PieceSeq, double> probs;
  ForEachSequence(grid.num_ids(), grid.frames(), [&](const std::vector<int>& z) {
    probs[Collapse(z)] += std::exp(PathLogProb(grid, z));
  });
  std::vector<Hypothesis> all;
  for (const auto& [l, p] : probs) all.push_back({l, std::log(p)});
  std::sort(all.begin(), all.end(), RanksBefore);
  if (static_cast<int>(all.size()) > n) all.resize(n);
  return all;
}

// Minimum edit cost found by enumerating every edit script.
inline int MinEditScript(const std::vector<std::string>& a,
                         const std::vector<std::string>& b, std::size_t i = 0,
                         std::size_t j = 0) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  const int diag = (a[i] == b[j] ? 0 : 1) + MinEditScript(a, b, i + 1, j + 1);
  const int del = 1 + MinEditScript(a, b, i + 1, j);
  const int ins = 1 + MinEditScript(a, b, i, j + 1);
  return std::min({diag, del, ins});
}

inline Matrix RandomLogits(std::mt19937_64& rng, std::size_t rows,
                           std::size_t cols, double scale = 1.5) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = n(rng);
  return m;
}

// Small integer logits so equal entries, and hence tied paths, are common.
inline Matrix TiedLogits(std::mt19937_64& rng, std::size_t rows,
                         std::size_t cols) {
  std::uniform_int_distribution<int> d(0, 1);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = d(rng);
  return m;
}

inline PieceSeq RandomLabel(std::mt19937_64& rng, int max_len, int vocab) {
  const int len = std::uniform_int_distribution<int>(1, max_len)(rng);
  PieceSeq l(len);
  for (PieceId& p : l) p = std::uniform_int_distribution<int>(1, vocab)(rng);
  return l;
}

inline Matrix OneHotLogPosteriors(const std::vector<int>& tokens, int num_ids,
                                  double floor = 1e-12) {
  Matrix m(tokens.size(), num_ids);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const double rest = floor * (num_ids - 1);
    for (int j = 0; j < num_ids; ++j) {
      m(t, j) = std::log(j == tokens[t] ? 1.0 - rest : floor);
    }
  }
  return m;
}

}  // namespace fdt::oracle

#endif  // FDT_TESTS_ORACLES_H_
