// core/include/fdt/fdt_loss.h

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

#ifndef FDT_FDT_LOSS_H_
#define FDT_FDT_LOSS_H_

#include <cstddef>
#include <vector>

#include "fdt/ctc.h"
#include "fdt/nbest.h"
#include "fdt/tokenizer.h"

namespace fdt {

// Frames are 0-based and inclusive on both ends.
struct WordFrameSpan {
  std::size_t word_index = 0;
  WordSpan pieces;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;

  std::size_t num_frames() const { return last_frame - first_frame + 1; }
};

struct WordSegmentation {
  Alignment reference_alignment;
  std::vector<WordFrameSpan> words;
};

struct ErrorSegment {
  std::size_t word_index = 0;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;
  PieceSeq ref_pieces;
  PieceSeq err_pieces;
  double hyp_weight = 1.0;

  std::size_t num_frames() const { return last_frame - first_frame + 1; }
};

struct SegmentLossGrad {
  double loss = 0.0;
  std::size_t first_frame = 0;
  Matrix grad_logp;  // span frames x (V + 1)
};

struct FdtResult {
  double loss = 0.0;
  Matrix grad_logp;  // T x (V + 1)
  int segments_flagged = 0;
  bool utterance_skipped = true;
};

// Word k covers [emission frame of word k-1's last piece (or frame 0),
// emission frame of word k's last piece]. Throws kInfeasibleLabel.
WordSegmentation SegmentByWords(const LogPosteriorGrid& grid,
                                const TokenizedUtterance& ref);

// Compares the collapsed reference and hypothesis alignments inside each
// word span. An empty or infeasible hypothesis aligns as all blanks.
std::vector<ErrorSegment> DetectErrorSegments(const LogPosteriorGrid& grid,
                                              const TokenizedUtterance& ref,
                                              const Hypothesis& hyp,
                                              const WordSegmentation& seg,
                                              double hyp_weight = 1.0);

// loss = log Q(err | span) - log Q(ref | span) on constrained graphs, and its
// gradient with respect to the log-posterior entries inside the span.
SegmentLossGrad SegmentContrastiveLossGrad(const LogPosteriorGrid& grid,
                                           const ErrorSegment& segment);

// Posterior-weighted sum of segment losses over the N-best list.
FdtResult FdtUtteranceLossGrad(const LogPosteriorGrid& grid,
                               const TokenizedUtterance& ref,
                               const NBestList& nbest);

// Chain rule from log-softmax outputs to the logits that produced them.
Matrix LogPosteriorGradToLogits(const LogPosteriorGrid& grid,
                                const Matrix& grad_logp);

}  // namespace fdt

#endif  // FDT_FDT_LOSS_H_
