// core/include/fdt/ctc.h

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

#ifndef FDT_CTC_H_
#define FDT_CTC_H_

#include <cstddef>
#include <vector>

#include "fdt/matrix.h"
#include "fdt/tokenizer.h"

namespace fdt {

// Per-frame log distribution over blank (column 0) and V pieces.
class LogPosteriorGrid {
 public:
  LogPosteriorGrid() = default;
  // Validates T >= 1 and |logsumexp(row)| <= 1e-6 for every row.
  explicit LogPosteriorGrid(Matrix log_probs);

  // Log-softmax of raw scores, one row per frame.
  static LogPosteriorGrid FromLogits(const Matrix& logits);
  // Skips row normalization; entries act as free log-potentials. Used when
  // differentiating with respect to individual entries.
  static LogPosteriorGrid Unnormalized(Matrix log_potentials);

  std::size_t frames() const { return values_.rows(); }
  int vocab_size() const { return static_cast<int>(values_.cols()) - 1; }
  int num_ids() const { return static_cast<int>(values_.cols()); }

  double operator()(std::size_t t, int id) const { return values_(t, id); }
  std::span<const double> row(std::size_t t) const { return values_.row(t); }
  const Matrix& values() const { return values_; }

  // Frames [first, first + count).
  LogPosteriorGrid slice(std::size_t first, std::size_t count) const;

 private:
  Matrix values_;
};

// B(.): drop blanks and merge repeats not separated by a blank.
PieceSeq Collapse(const std::vector<PieceId>& tokens);

// Minimum frame count for `labels` on the blank-interleaved graph.
std::size_t MinFramesFor(const PieceSeq& labels);

// -log sum over all token sequences collapsing to `labels`.
// An empty label sequence is the all-blank path. Throws kInfeasibleLabel.
double CtcForwardLoss(const LogPosteriorGrid& grid, const PieceSeq& labels);

// gamma_t(j): posterior mass of valid paths occupying a state with id j.
Matrix CtcOccupancies(const LogPosteriorGrid& grid, const PieceSeq& labels);

struct CtcLossGrad {
  double loss = 0.0;
  Matrix occupancy;
  Matrix grad_logits;  // exp(grid) - occupancy
};

CtcLossGrad CtcLossAndGrad(const LogPosteriorGrid& grid,
                           const PieceSeq& labels);

inline Matrix CtcGradLogits(const LogPosteriorGrid& grid,
                            const PieceSeq& labels) {
  return CtcLossAndGrad(grid, labels).grad_logits;
}

struct Alignment {
  std::vector<PieceId> tokens;
  // 0-based frame where the best path first occupies label position i.
  std::vector<std::size_t> emission_frames;
  double log_prob = 0.0;
};

// Best path among those collapsing to `labels`. Ties go to the predecessor
// with the lower state index (and the lower-index final state).
Alignment ViterbiAlign(const LogPosteriorGrid& grid, const PieceSeq& labels);

}  // namespace fdt

#endif  // FDT_CTC_H_
