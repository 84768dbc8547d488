// core/include/fdt/evaluate.h

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

#ifndef FDT_EVALUATE_H_
#define FDT_EVALUATE_H_

#include <string>
#include <vector>

#include "fdt/ctc.h"
#include "fdt/encoder.h"
#include "fdt/nbest.h"
#include "fdt/seq_baselines.h"
#include "fdt/synth.h"

namespace fdt {

struct WerReport {
  EditStats stats;
  int utterances = 0;
  std::vector<std::vector<std::string>> hyp_words;

  double wer() const { return stats.wer(); }
};

WerReport ScoreTranscripts(const std::vector<Utterance>& utts,
                           const std::vector<PieceSeq>& hyps,
                           const PieceInventory& inventory);

WerReport EvaluateGrids(const std::vector<Utterance>& utts,
                        const std::vector<LogPosteriorGrid>& grids,
                        const PieceInventory& inventory, int beam, int n);

// N-best lists of every utterance, decoded on up to `workers` threads.
std::vector<std::vector<Hypothesis>> DecodeNBest(
    const EncoderParams& params, const std::vector<Utterance>& utts, int beam,
    int n, int workers = 1);

WerReport Evaluate(const EncoderParams& params,
                   const std::vector<Utterance>& utts,
                   const PieceInventory& inventory, int beam, int n,
                   int workers = 1);

struct EntropyReport {
  double mean = 0.0;
  long frames = 0;
  std::vector<double> bin_edges;  // bins + 1 edges over [0, ln(V+1)]
  std::vector<long> counts;
};

double FrameEntropy(std::span<const double> log_probs);
EntropyReport EntropyOfGrids(const std::vector<LogPosteriorGrid>& grids,
                             int bins = 20);
EntropyReport EntropyReportFor(const EncoderParams& params,
                               const std::vector<Utterance>& utts,
                               int bins = 20, int workers = 1);

// Relative WER reduction of `wer` against `base`.
double Werr(double base, double wer);

}  // namespace fdt

#endif  // FDT_EVALUATE_H_
