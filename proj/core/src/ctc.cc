// core/src/ctc.cc

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

#include <cmath>
#include <string>

#include "fdt/error.h"
#include "fdt/log_math.h"

namespace fdt {
namespace {

constexpr double kRowNormTolerance = 1e-6;

void CheckEntries(const Matrix& m) {
  for (double v : m.values()) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::kInvalidGrid, "non-finite log-posterior");
    }
  }
}

// Blank-interleaved label graph: state 2i+1 emits labels[i], even states
// emit blank.
class LabelGraph {
 public:
  LabelGraph(const LogPosteriorGrid& grid, const PieceSeq& labels)
      : labels_(labels) {
    for (PieceId id : labels) {
      if (id <= kBlankId || id > grid.vocab_size()) {
        throw Error(ErrorCode::kInvalidLabel, "label id " + std::to_string(id));
      }
    }
    if (grid.frames() < MinFramesFor(labels)) {
      throw Error(ErrorCode::kInfeasibleLabel,
                  std::to_string(labels.size()) + " labels need " +
                      std::to_string(MinFramesFor(labels)) + " frames, have " +
                      std::to_string(grid.frames()));
    }
  }

  int num_states() const { return 2 * static_cast<int>(labels_.size()) + 1; }
  PieceId id(int s) const { return s % 2 == 0 ? kBlankId : labels_[s / 2]; }
  bool can_skip_into(int s) const {
    return s % 2 == 1 && s >= 3 && labels_[s / 2] != labels_[s / 2 - 1];
  }
  bool accepting(int s) const { return s >= num_states() - 2; }

 private:
  const PieceSeq& labels_;
};

struct ForwardBackward {
  Matrix alpha;
  Matrix beta;
  double log_prob = kLogZero;
};

ForwardBackward RunForwardBackward(const LogPosteriorGrid& grid,
                                   const PieceSeq& labels) {
  const LabelGraph graph(grid, labels);
  const std::size_t T = grid.frames();
  const int S = graph.num_states();

  ForwardBackward fb{Matrix(T, S, kLogZero), Matrix(T, S, kLogZero), kLogZero};
  Matrix& alpha = fb.alpha;
  alpha(0, 0) = grid(0, kBlankId);
  if (S > 1) alpha(0, 1) = grid(0, graph.id(1));
  for (std::size_t t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = LogAdd(acc, alpha(t - 1, s - 1));
      if (graph.can_skip_into(s)) acc = LogAdd(acc, alpha(t - 1, s - 2));
      alpha(t, s) = acc + grid(t, graph.id(s));
    }
  }
  for (int s = 0; s < S; ++s) {
    if (graph.accepting(s)) fb.log_prob = LogAdd(fb.log_prob, alpha(T - 1, s));
  }
  if (fb.log_prob == kLogZero) {
    throw Error(ErrorCode::kInfeasibleLabel, "no path with nonzero probability");
  }

  Matrix& beta = fb.beta;
  for (int s = 0; s < S; ++s) {
    if (graph.accepting(s)) beta(T - 1, s) = 0.0;
  }
  for (std::size_t t = T - 1; t-- > 0;) {
    for (int s = 0; s < S; ++s) {
      double acc = beta(t + 1, s) + grid(t + 1, graph.id(s));
      if (s + 1 < S) {
        acc = LogAdd(acc, beta(t + 1, s + 1) + grid(t + 1, graph.id(s + 1)));
      }
      if (s + 2 < S && graph.can_skip_into(s + 2)) {
        acc = LogAdd(acc, beta(t + 1, s + 2) + grid(t + 1, graph.id(s + 2)));
      }
      beta(t, s) = acc;
    }
  }
  return fb;
}

}  // namespace

LogPosteriorGrid::LogPosteriorGrid(Matrix log_probs)
    : values_(std::move(log_probs)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw Error(ErrorCode::kInvalidGrid, "grid needs at least one frame");
  }
  CheckEntries(values_);
  for (std::size_t t = 0; t < values_.rows(); ++t) {
    const double norm = LogSumExp(values_.row(t));
    if (!(std::abs(norm) <= kRowNormTolerance)) {
      throw Error(ErrorCode::kInvalidGrid,
                  "row " + std::to_string(t) + " is not normalized");
    }
  }
}

LogPosteriorGrid LogPosteriorGrid::FromLogits(const Matrix& logits) {
  Matrix values = logits;
  CheckEntries(values);
  for (std::size_t t = 0; t < values.rows(); ++t) {
    LogSoftmaxInPlace(values.row(t));
  }
  return Unnormalized(std::move(values));
}

LogPosteriorGrid LogPosteriorGrid::Unnormalized(Matrix log_potentials) {
  if (log_potentials.rows() == 0 || log_potentials.cols() == 0) {
    throw Error(ErrorCode::kInvalidGrid, "grid needs at least one frame");
  }
  CheckEntries(log_potentials);
  LogPosteriorGrid grid;
  grid.values_ = std::move(log_potentials);
  return grid;
}

LogPosteriorGrid LogPosteriorGrid::slice(std::size_t first,
                                         std::size_t count) const {
  if (count == 0 || first + count > frames()) {
    throw Error(ErrorCode::kDimensionMismatch, "grid slice out of range");
  }
  LogPosteriorGrid out;
  out.values_ = values_.row_range(first, count);
  return out;
}

PieceSeq Collapse(const std::vector<PieceId>& tokens) {
  PieceSeq out;
  PieceId prev = kBlankId;
  for (PieceId z : tokens) {
    if (z != kBlankId && z != prev) out.push_back(z);
    prev = z;
  }
  return out;
}

std::size_t MinFramesFor(const PieceSeq& labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++n;
  }
  return std::max<std::size_t>(n, 1);
}

double CtcForwardLoss(const LogPosteriorGrid& grid, const PieceSeq& labels) {
  const LabelGraph graph(grid, labels);
  const int S = graph.num_states();
  std::vector<double> prev(S, kLogZero), cur(S, kLogZero);
  prev[0] = grid(0, kBlankId);
  if (S > 1) prev[1] = grid(0, graph.id(1));
  for (std::size_t t = 1; t < grid.frames(); ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = prev[s];
      if (s >= 1) acc = LogAdd(acc, prev[s - 1]);
      if (graph.can_skip_into(s)) acc = LogAdd(acc, prev[s - 2]);
      cur[s] = acc + grid(t, graph.id(s));
    }
    std::swap(prev, cur);
  }
  double log_prob = prev[S - 1];
  if (S > 1) log_prob = LogAdd(log_prob, prev[S - 2]);
  if (log_prob == kLogZero) {
    throw Error(ErrorCode::kInfeasibleLabel, "no path with nonzero probability");
  }
  return -log_prob;
}

Matrix CtcOccupancies(const LogPosteriorGrid& grid, const PieceSeq& labels) {
  return CtcLossAndGrad(grid, labels).occupancy;
}

CtcLossGrad CtcLossAndGrad(const LogPosteriorGrid& grid,
                           const PieceSeq& labels) {
  const ForwardBackward fb = RunForwardBackward(grid, labels);
  const LabelGraph graph(grid, labels);
  const std::size_t T = grid.frames();
  const int S = graph.num_states();

  CtcLossGrad out;
  out.loss = -fb.log_prob;
  out.occupancy = Matrix(T, grid.num_ids());
  out.grad_logits = Matrix(T, grid.num_ids());
  for (std::size_t t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const double lp = fb.alpha(t, s) + fb.beta(t, s) - fb.log_prob;
      if (lp != kLogZero) out.occupancy(t, graph.id(s)) += std::exp(lp);
    }
    for (int j = 0; j < grid.num_ids(); ++j) {
      out.grad_logits(t, j) = std::exp(grid(t, j)) - out.occupancy(t, j);
    }
  }
  return out;
}

Alignment ViterbiAlign(const LogPosteriorGrid& grid, const PieceSeq& labels) {
  const LabelGraph graph(grid, labels);
  const std::size_t T = grid.frames();
  const int S = graph.num_states();

  Matrix delta(T, S, kLogZero);
  std::vector<signed char> back(T * S, 0);
  delta(0, 0) = grid(0, kBlankId);
  if (S > 1) delta(0, 1) = grid(0, graph.id(1));
  for (std::size_t t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      // Candidates in increasing source index; only a strictly better score
      // displaces an earlier one.
      double best = kLogZero;
      signed char offset = 0;
      bool found = false;
      auto consider = [&](double score, signed char off) {
        if (!found || score > best) {
          best = score;
          offset = off;
          found = true;
        }
      };
      if (graph.can_skip_into(s)) consider(delta(t - 1, s - 2), 2);
      if (s >= 1) consider(delta(t - 1, s - 1), 1);
      consider(delta(t - 1, s), 0);
      delta(t, s) = best + grid(t, graph.id(s));
      back[t * S + s] = offset;
    }
  }

  int state = S - 1;
  if (S > 1 && !(delta(T - 1, S - 1) > delta(T - 1, S - 2))) state = S - 2;
  Alignment out;
  out.log_prob = delta(T - 1, state);
  if (out.log_prob == kLogZero) {
    throw Error(ErrorCode::kInfeasibleLabel, "no path with nonzero probability");
  }

  std::vector<int> states(T);
  for (std::size_t t = T; t-- > 0;) {
    states[t] = state;
    state -= back[t * S + state];
  }
  out.tokens.resize(T);
  out.emission_frames.assign(labels.size(), 0);
  for (std::size_t t = 0; t < T; ++t) {
    out.tokens[t] = graph.id(states[t]);
    const bool entered = t == 0 || states[t - 1] != states[t];
    if (states[t] % 2 == 1 && entered) {
      out.emission_frames[states[t] / 2] = t;
    }
  }
  return out;
}

}  // namespace fdt
