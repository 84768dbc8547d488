// core/include/fdt/seq_baselines.h

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

#ifndef FDT_SEQ_BASELINES_H_
#define FDT_SEQ_BASELINES_H_

#include <string>
#include <vector>

#include "fdt/ctc.h"
#include "fdt/nbest.h"
#include "fdt/tokenizer.h"

namespace fdt {

struct EditStats {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int ref_len = 0;

  int errors() const { return substitutions + insertions + deletions; }
  double wer() const {
    return ref_len == 0 ? 0.0 : static_cast<double>(errors()) / ref_len;
  }
  EditStats& operator+=(const EditStats& other);
};

// Unit-cost edit distance. Backtrace prefers substitution, then insertion,
// then deletion. Throws kEmptyReference.
EditStats LevenshteinWer(const std::vector<std::string>& ref,
                         const std::vector<std::string>& hyp);

struct SequenceLossGrad {
  double loss = 0.0;
  Matrix grad_logits;
  std::vector<Hypothesis> hyps;      // the list actually scored
  std::vector<double> posteriors;    // recomputed from the current grid
};

struct MwerScores {
  double loss = 0.0;
  std::vector<double> posteriors;
  std::vector<double> grad_scores;  // posterior_i * (E_i - mean E)
};

// Expected errors under softmax(log_scores) and its gradient w.r.t. scores.
MwerScores MwerFromScores(const std::vector<double>& log_scores,
                          const std::vector<double>& errors);

// Expected word errors over the N-best list plus the reference; hypothesis
// scores are recomputed from `grid` so the loss is a function of the logits.
SequenceLossGrad MwerLossGrad(const LogPosteriorGrid& grid,
                              const TokenizedUtterance& ref,
                              const NBestList& nbest,
                              const PieceInventory& inventory);

struct MmiScores {
  double loss = 0.0;
  std::vector<double> posteriors;
  std::vector<double> grad_scores;  // posterior_i - [i == ref]
};
// logsumexp(log_scores) - log_scores[ref_index] and its score gradient.
MmiScores MmiFromScores(const std::vector<double>& log_scores,
                        std::size_t ref_index);

// -log P(ref) + logsumexp over N-best plus reference.
SequenceLossGrad MmiLossGrad(const LogPosteriorGrid& grid,
                             const TokenizedUtterance& ref,
                             const NBestList& nbest);

}  // namespace fdt

#endif  // FDT_SEQ_BASELINES_H_
