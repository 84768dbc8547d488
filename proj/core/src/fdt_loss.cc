// core/src/fdt_loss.cc

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

#include "fdt/fdt_loss.h"

#include <cmath>
#include <map>

#include "fdt/constrained_graph.h"
#include "fdt/error.h"

namespace fdt {
namespace {

std::vector<PieceId> AlignHypothesis(const LogPosteriorGrid& grid,
                                     const PieceSeq& pieces) {
  if (!pieces.empty()) {
    try {
      return ViterbiAlign(grid, pieces).tokens;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleLabel) throw;
    }
  }
  return std::vector<PieceId>(grid.frames(), kBlankId);
}

PieceSeq CollapseSlice(const std::vector<PieceId>& tokens, std::size_t first,
                       std::size_t last) {
  return Collapse(std::vector<PieceId>(tokens.begin() + first,
                                       tokens.begin() + last + 1));
}

// Occupancy from an already computed lattice.
Matrix Occupancy(const ConstrainedWordGraph& graph,
                 const ConstrainedLattice& lat, int num_ids) {
  Matrix gamma(graph.frames(), num_ids);
  for (std::size_t t = 0; t < graph.frames(); ++t) {
    for (int s = 0; s < graph.num_states(); ++s) {
      const double lp = lat.alpha(t, s) + lat.beta(t, s) - lat.log_score;
      if (std::isfinite(lp)) gamma(t, graph.state_id(s)) += std::exp(lp);
    }
  }
  return gamma;
}

}  // namespace

WordSegmentation SegmentByWords(const LogPosteriorGrid& grid,
                                const TokenizedUtterance& ref) {
  if (ref.word_spans.empty()) {
    throw Error(ErrorCode::kEmptyLabel, "reference has no words");
  }
  WordSegmentation seg;
  seg.reference_alignment = ViterbiAlign(grid, ref.pieces);
  const auto& emissions = seg.reference_alignment.emission_frames;
  std::size_t start = 0;
  for (std::size_t k = 0; k < ref.word_spans.size(); ++k) {
    const WordSpan& span = ref.word_spans[k];
    if (span.begin >= span.end || span.end > ref.pieces.size()) {
      throw Error(ErrorCode::kSpanOutOfRange, "word " + std::to_string(k));
    }
    const std::size_t end = emissions[span.end - 1];
    seg.words.push_back({k, span, start, end});
    start = end;
  }
  return seg;
}

std::vector<ErrorSegment> DetectErrorSegments(const LogPosteriorGrid& grid,
                                              const TokenizedUtterance& ref,
                                              const Hypothesis& hyp,
                                              const WordSegmentation& seg,
                                              double hyp_weight) {
  const std::vector<PieceId>& ref_tokens = seg.reference_alignment.tokens;
  const std::vector<PieceId> hyp_tokens = AlignHypothesis(grid, hyp.pieces);

  std::vector<ErrorSegment> out;
  for (const WordFrameSpan& word : seg.words) {
    const PieceSeq ref_slice =
        CollapseSlice(ref_tokens, word.first_frame, word.last_frame);
    const PieceSeq hyp_slice =
        CollapseSlice(hyp_tokens, word.first_frame, word.last_frame);
    if (ref_slice == hyp_slice) continue;

    std::map<PieceId, int> available;
    for (PieceId p : ref_slice) ++available[p];
    ErrorSegment e;
    e.word_index = word.word_index;
    e.first_frame = word.first_frame;
    e.last_frame = word.last_frame;
    e.ref_pieces.assign(ref.pieces.begin() + word.pieces.begin,
                        ref.pieces.begin() + word.pieces.end);
    for (PieceId p : hyp_slice) {
      auto it = available.find(p);
      if (it != available.end() && it->second > 0) {
        --it->second;
      } else {
        e.err_pieces.push_back(p);
      }
    }
    e.hyp_weight = hyp_weight;
    out.push_back(std::move(e));
  }
  return out;
}

SegmentLossGrad SegmentContrastiveLossGrad(const LogPosteriorGrid& grid,
                                           const ErrorSegment& segment) {
  if (segment.ref_pieces.empty()) {
    throw Error(ErrorCode::kEmptyLabel, "segment without reference pieces");
  }
  if (segment.last_frame < segment.first_frame ||
      segment.last_frame >= grid.frames()) {
    throw Error(ErrorCode::kDimensionMismatch, "segment outside the grid");
  }
  const std::size_t frames = segment.num_frames();
  if (frames < segment.ref_pieces.size()) {
    throw Error(ErrorCode::kTooShortSegment,
                std::to_string(segment.ref_pieces.size()) + " pieces in " +
                    std::to_string(frames) + " frames");
  }
  const LogPosteriorGrid span = grid.slice(segment.first_frame, frames);
  const ConstrainedWordGraph ref_graph =
      BuildWordGraph(segment.ref_pieces, frames);
  const ConstrainedWordGraph err_graph =
      segment.err_pieces.empty() ? BuildBlankGraph(frames)
                                 : BuildWordGraph(segment.err_pieces, frames);
  const ConstrainedLattice ref_lat = ConstrainedForwardBackward(ref_graph, span);
  const ConstrainedLattice err_lat = ConstrainedForwardBackward(err_graph, span);

  SegmentLossGrad out;
  out.first_frame = segment.first_frame;
  out.loss = err_lat.log_score - ref_lat.log_score;
  const Matrix ref_gamma = Occupancy(ref_graph, ref_lat, grid.num_ids());
  const Matrix err_gamma = Occupancy(err_graph, err_lat, grid.num_ids());
  out.grad_logp = Matrix(frames, grid.num_ids());
  for (std::size_t i = 0; i < out.grad_logp.size(); ++i) {
    out.grad_logp.values()[i] = err_gamma.values()[i] - ref_gamma.values()[i];
  }
  return out;
}

FdtResult FdtUtteranceLossGrad(const LogPosteriorGrid& grid,
                               const TokenizedUtterance& ref,
                               const NBestList& nbest) {
  if (nbest.hyps.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "empty N-best list");
  }
  const WordSegmentation seg = SegmentByWords(grid, ref);
  FdtResult result;
  result.grad_logp = Matrix(grid.frames(), grid.num_ids());
  for (std::size_t i = 0; i < nbest.hyps.size(); ++i) {
    const double weight = nbest.posteriors[i];
    for (const ErrorSegment& e :
         DetectErrorSegments(grid, ref, nbest.hyps[i], seg, weight)) {
      const SegmentLossGrad lg = SegmentContrastiveLossGrad(grid, e);
      result.loss += weight * lg.loss;
      for (std::size_t r = 0; r < lg.grad_logp.rows(); ++r) {
        auto dst = result.grad_logp.row(lg.first_frame + r);
        auto src = lg.grad_logp.row(r);
        for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += weight * src[j];
      }
      ++result.segments_flagged;
    }
  }
  result.utterance_skipped = result.segments_flagged == 0;
  return result;
}

Matrix LogPosteriorGradToLogits(const LogPosteriorGrid& grid,
                                const Matrix& grad_logp) {
  if (grad_logp.rows() != grid.frames() ||
      grad_logp.cols() != static_cast<std::size_t>(grid.num_ids())) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient shape");
  }
  Matrix out(grad_logp.rows(), grad_logp.cols());
  for (std::size_t t = 0; t < grad_logp.rows(); ++t) {
    double sum = 0.0;
    for (double g : grad_logp.row(t)) sum += g;
    for (std::size_t j = 0; j < grad_logp.cols(); ++j) {
      out(t, j) = grad_logp(t, j) - std::exp(grid(t, static_cast<int>(j))) * sum;
    }
  }
  return out;
}

}  // namespace fdt
