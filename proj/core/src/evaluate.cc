// core/src/evaluate.cc

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

#include "fdt/evaluate.h"

#include <algorithm>
#include <cmath>

#include "fdt/error.h"
#include "fdt/log_math.h"
#include "fdt/parallel.h"

namespace fdt {

WerReport ScoreTranscripts(const std::vector<Utterance>& utts,
                           const std::vector<PieceSeq>& hyps,
                           const PieceInventory& inventory) {
  if (utts.size() != hyps.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one hypothesis per utterance");
  }
  WerReport report;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    auto words = PiecesToWords(hyps[i], inventory.lexicon, inventory.vocab);
    report.stats += LevenshteinWer(utts[i].ref.words, words);
    report.hyp_words.push_back(std::move(words));
    ++report.utterances;
  }
  return report;
}

WerReport EvaluateGrids(const std::vector<Utterance>& utts,
                        const std::vector<LogPosteriorGrid>& grids,
                        const PieceInventory& inventory, int beam, int n) {
  std::vector<PieceSeq> hyps;
  for (const LogPosteriorGrid& grid : grids) {
    hyps.push_back(PrefixBeamSearch(grid, beam, n).front().pieces);
  }
  return ScoreTranscripts(utts, hyps, inventory);
}

std::vector<std::vector<Hypothesis>> DecodeNBest(
    const EncoderParams& params, const std::vector<Utterance>& utts, int beam,
    int n, int workers) {
  return ParallelMap<std::vector<Hypothesis>>(
      utts.size(), workers, [&](std::size_t i) {
        return PrefixBeamSearch(EncoderForward(params, utts[i].features), beam,
                                n);
      });
}

WerReport Evaluate(const EncoderParams& params,
                   const std::vector<Utterance>& utts,
                   const PieceInventory& inventory, int beam, int n,
                   int workers) {
  std::vector<PieceSeq> hyps;
  for (auto& nbest : DecodeNBest(params, utts, beam, n, workers)) {
    hyps.push_back(std::move(nbest.front().pieces));
  }
  return ScoreTranscripts(utts, hyps, inventory);
}

double FrameEntropy(std::span<const double> log_probs) {
  double h = 0.0;
  for (double lp : log_probs) {
    if (lp != kLogZero) h -= std::exp(lp) * lp;
  }
  return h;
}

EntropyReport EntropyOfGrids(const std::vector<LogPosteriorGrid>& grids,
                             int bins) {
  EntropyReport report;
  if (grids.empty() || bins < 1) return report;
  const double max_entropy = std::log(grids.front().num_ids());
  for (int b = 0; b <= bins; ++b) {
    report.bin_edges.push_back(max_entropy * b / bins);
  }
  report.counts.assign(bins, 0);
  double sum = 0.0;
  for (const LogPosteriorGrid& grid : grids) {
    for (std::size_t t = 0; t < grid.frames(); ++t) {
      const double h = FrameEntropy(grid.row(t));
      sum += h;
      ++report.frames;
      const int b = std::clamp(static_cast<int>(h / max_entropy * bins), 0,
                               bins - 1);
      ++report.counts[b];
    }
  }
  report.mean = sum / report.frames;
  return report;
}

EntropyReport EntropyReportFor(const EncoderParams& params,
                               const std::vector<Utterance>& utts, int bins,
                               int workers) {
  const auto grids = ParallelMap<LogPosteriorGrid>(
      utts.size(), workers,
      [&](std::size_t i) { return EncoderForward(params, utts[i].features); });
  return EntropyOfGrids(grids, bins);
}

double Werr(double base, double wer) {
  return base == 0.0 ? 0.0 : (base - wer) / base;
}

}  // namespace fdt
