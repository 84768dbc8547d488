// core/include/fdt/nbest.h

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

#ifndef FDT_NBEST_H_
#define FDT_NBEST_H_

#include <vector>

#include "fdt/ctc.h"

namespace fdt {

struct Hypothesis {
  PieceSeq pieces;
  double log_score = 0.0;  // log P(pieces | x), summed over alignments
  bool operator==(const Hypothesis&) const = default;
};

struct NBestList {
  std::vector<Hypothesis> hyps;
  std::vector<double> posteriors;
};

// Ordering used for ranking prefixes: higher score first, then shorter,
// then lexicographically smaller.
bool RanksBefore(const Hypothesis& a, const Hypothesis& b);

// CTC prefix beam search keeping `beam` prefixes per frame and returning the
// `n` best distinct collapsed prefixes. Requires beam >= n >= 1.
std::vector<Hypothesis> PrefixBeamSearch(const LogPosteriorGrid& grid,
                                         int beam, int n);

// Normalizes the hypothesis scores over the list. Requires a non-empty list.
NBestList NBestPosteriors(std::vector<Hypothesis> hyps);

}  // namespace fdt

#endif  // FDT_NBEST_H_
