// core/include/fdt/constrained_graph.h

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

#ifndef FDT_CONSTRAINED_GRAPH_H_
#define FDT_CONSTRAINED_GRAPH_H_

#include <cstddef>
#include <vector>

#include "fdt/ctc.h"

namespace fdt {

// Transition probabilities q(z_t | z_{t-1}, T) of the within-word graph.
// Leaving a blank state: stay 1/T, advance (T-1)/T. Leaving a piece state:
// equal mass on each allowed arc. The horizon is clamped to 2 so a one-frame
// segment keeps every probability inside (0, 1).
struct TransitionModel {
  std::size_t horizon = 2;

  explicit TransitionModel(std::size_t frames);
  double blank_stay() const;
  double blank_advance() const;
};

struct GraphArc {
  int from = 0;
  int to = 0;
  double log_q = 0.0;
};

// Constrained CTC graph for one word's pieces: initial blank, one state per
// piece, final blank. Blanks are only reachable before the first piece and
// after the last one.
class ConstrainedWordGraph {
 public:
  const PieceSeq& label() const { return label_; }
  std::size_t frames() const { return frames_; }
  int num_states() const { return static_cast<int>(state_ids_.size()); }

  PieceId state_id(int state) const { return state_ids_[state]; }
  // Log weight of entering `state` at the first frame (kLogZero if barred).
  double start_log_q(int state) const { return start_log_q_[state]; }
  bool accepting(int state) const { return accepting_[state]; }
  const std::vector<GraphArc>& arcs() const { return arcs_; }
  bool is_blank_only() const { return label_.empty(); }

  friend ConstrainedWordGraph BuildWordGraph(const PieceSeq& label,
                                             std::size_t frames);
  friend ConstrainedWordGraph BuildBlankGraph(std::size_t frames);

 private:
  PieceSeq label_;
  std::size_t frames_ = 0;
  std::vector<PieceId> state_ids_;
  std::vector<double> start_log_q_;
  std::vector<bool> accepting_;
  std::vector<GraphArc> arcs_;  // sorted by destination, then source
};

// Throws kEmptyLabel, kInvalidLabel (blank in label), kTooShortSegment.
ConstrainedWordGraph BuildWordGraph(const PieceSeq& label, std::size_t frames);

// Single blank state with unit weights: the competitor for a segment whose
// hypothesis emitted nothing beyond the reference.
ConstrainedWordGraph BuildBlankGraph(std::size_t frames);

// Forward and backward tables over (frame, state) in log space. beta
// excludes the emission at its own frame.
struct ConstrainedLattice {
  Matrix alpha;
  Matrix beta;
  double log_score = 0.0;  // log Q, unnormalized
};

ConstrainedLattice ConstrainedForwardBackward(
    const ConstrainedWordGraph& graph, const LogPosteriorGrid& segment);

// log Q(l | x) = log sum over complete paths of prod_t p_t(z_t) q(z_t|z_t-1).
double ConstrainedForwardScore(const ConstrainedWordGraph& graph,
                               const LogPosteriorGrid& segment);

// Per-frame normalized occupancy mapped onto vocabulary ids.
Matrix ConstrainedOccupancies(const ConstrainedWordGraph& graph,
                              const LogPosteriorGrid& segment);

}  // namespace fdt

#endif  // FDT_CONSTRAINED_GRAPH_H_
