// core/src/constrained_graph.cc

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

#include <algorithm>
#include <cmath>
#include <string>

#include "fdt/error.h"
#include "fdt/log_math.h"

namespace fdt {

TransitionModel::TransitionModel(std::size_t frames)
    : horizon(std::max<std::size_t>(frames, 2)) {}

double TransitionModel::blank_stay() const { return 1.0 / horizon; }

double TransitionModel::blank_advance() const {
  return static_cast<double>(horizon - 1) / horizon;
}

ConstrainedWordGraph BuildWordGraph(const PieceSeq& label,
                                    std::size_t frames) {
  if (label.empty()) throw Error(ErrorCode::kEmptyLabel, "word graph");
  for (PieceId id : label) {
    if (id <= kBlankId) {
      throw Error(ErrorCode::kInvalidLabel, "blank inside a word label");
    }
  }
  if (frames < label.size()) {
    throw Error(ErrorCode::kTooShortSegment,
                std::to_string(label.size()) + " pieces in " +
                    std::to_string(frames) + " frames");
  }
  const int u = static_cast<int>(label.size());
  const int initial = 0;
  const int final_blank = u + 1;
  const TransitionModel q(frames);
  const double half = std::log(0.5);

  ConstrainedWordGraph g;
  g.label_ = label;
  g.frames_ = frames;
  g.state_ids_.push_back(kBlankId);
  g.state_ids_.insert(g.state_ids_.end(), label.begin(), label.end());
  g.state_ids_.push_back(kBlankId);
  g.start_log_q_.assign(u + 2, kLogZero);
  g.start_log_q_[initial] = std::log(q.blank_stay());
  g.start_log_q_[1] = std::log(q.blank_advance());
  g.accepting_.assign(u + 2, false);
  g.accepting_[u] = true;
  g.accepting_[final_blank] = true;

  g.arcs_.push_back({initial, initial, std::log(q.blank_stay())});
  g.arcs_.push_back({initial, 1, std::log(q.blank_advance())});
  for (int s = 1; s <= u; ++s) {
    g.arcs_.push_back({s, s, half});
    g.arcs_.push_back({s, s + 1, half});  // s == u leads to the final blank
  }
  g.arcs_.push_back({final_blank, final_blank, 0.0});
  std::sort(g.arcs_.begin(), g.arcs_.end(),
            [](const GraphArc& a, const GraphArc& b) {
              return a.to != b.to ? a.to < b.to : a.from < b.from;
            });
  return g;
}

ConstrainedWordGraph BuildBlankGraph(std::size_t frames) {
  if (frames == 0) throw Error(ErrorCode::kTooShortSegment, "blank graph");
  ConstrainedWordGraph g;
  g.frames_ = frames;
  g.state_ids_ = {kBlankId};
  g.start_log_q_ = {0.0};
  g.accepting_ = {true};
  g.arcs_ = {{0, 0, 0.0}};
  return g;
}

ConstrainedLattice ConstrainedForwardBackward(
    const ConstrainedWordGraph& graph, const LogPosteriorGrid& segment) {
  if (segment.frames() != graph.frames()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "segment has " + std::to_string(segment.frames()) +
                    " frames, graph expects " +
                    std::to_string(graph.frames()));
  }
  for (PieceId id : graph.label()) {
    if (id >= segment.num_ids()) {
      throw Error(ErrorCode::kDimensionMismatch, "label id outside grid");
    }
  }
  const std::size_t T = graph.frames();
  const int S = graph.num_states();
  ConstrainedLattice lat{Matrix(T, S, kLogZero), Matrix(T, S, kLogZero),
                         kLogZero};

  for (int s = 0; s < S; ++s) {
    lat.alpha(0, s) = graph.start_log_q(s) + segment(0, graph.state_id(s));
  }
  for (std::size_t t = 1; t < T; ++t) {
    for (const GraphArc& arc : graph.arcs()) {
      lat.alpha(t, arc.to) =
          LogAdd(lat.alpha(t, arc.to), lat.alpha(t - 1, arc.from) + arc.log_q);
    }
    for (int s = 0; s < S; ++s) lat.alpha(t, s) += segment(t, graph.state_id(s));
  }
  for (int s = 0; s < S; ++s) {
    if (graph.accepting(s)) {
      lat.log_score = LogAdd(lat.log_score, lat.alpha(T - 1, s));
      lat.beta(T - 1, s) = 0.0;
    }
  }
  for (std::size_t t = T - 1; t-- > 0;) {
    for (const GraphArc& arc : graph.arcs()) {
      lat.beta(t, arc.from) =
          LogAdd(lat.beta(t, arc.from),
                 arc.log_q + segment(t + 1, graph.state_id(arc.to)) +
                     lat.beta(t + 1, arc.to));
    }
  }
  return lat;
}

double ConstrainedForwardScore(const ConstrainedWordGraph& graph,
                               const LogPosteriorGrid& segment) {
  return ConstrainedForwardBackward(graph, segment).log_score;
}

Matrix ConstrainedOccupancies(const ConstrainedWordGraph& graph,
                              const LogPosteriorGrid& segment) {
  const ConstrainedLattice lat = ConstrainedForwardBackward(graph, segment);
  if (lat.log_score == kLogZero) {
    throw Error(ErrorCode::kInfeasibleLabel, "constrained graph has no path");
  }
  Matrix gamma(graph.frames(), segment.num_ids());
  for (std::size_t t = 0; t < graph.frames(); ++t) {
    for (int s = 0; s < graph.num_states(); ++s) {
      const double lp = lat.alpha(t, s) + lat.beta(t, s) - lat.log_score;
      if (lp != kLogZero) gamma(t, graph.state_id(s)) += std::exp(lp);
    }
  }
  return gamma;
}

}  // namespace fdt
