// core/include/fdt/train.h

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

#ifndef FDT_TRAIN_H_
#define FDT_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdt/encoder.h"
#include "fdt/synth.h"
#include "fdt/tokenizer.h"

namespace fdt {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainOptions {
  AdamOptions adam;
  int batch_size = 8;
  int epochs = 20;
  int context = 5;
  int hidden = 64;
  std::uint64_t seed = 1;
  int workers = 1;
};

enum class LossKind { kFdt, kMmi, kMwer, kCtcControl };

std::string_view LossKindName(LossKind kind);
std::optional<LossKind> ParseLossKind(std::string_view name);

struct FinetuneOptions {
  AdamOptions adam{.lr = 3e-5};
  int batch_size = 8;
  int epochs = 1;
  // Weight of the CTC term in (1 - w) * discriminative + w * CTC.
  double ctc_weight = 0.1;
  int beam = 16;
  int nbest = 4;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct AdamState {
  EncoderParams m;
  EncoderParams v;
  std::uint64_t t = 0;
};

// Parameters and moments are kept float32-representable so a checkpoint
// round trip is lossless.
struct TrainState {
  EncoderParams params;
  AdamState adam;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::vector<double> epoch_losses;  // mean utterance loss per finished epoch
  double epoch_loss_sum = 0.0;       // running sum for the current epoch
  std::uint64_t epoch_loss_count = 0;
};

struct StepStats {
  double loss = 0.0;
  int utterances = 0;
  int skipped = 0;
  int segments_flagged = 0;
};

TrainState InitTrainState(const EncoderConfig& config, std::uint64_t seed);

// Minibatch CTC training with Adam. Resumes from `state.step` and stops once
// `options.epochs` epochs are complete. Throws kDivergence on a non-finite
// loss.
TrainState TrainCtcStage(TrainState state, const std::vector<Utterance>& data,
                         const TrainOptions& options);
TrainState TrainCtcStage(const std::vector<Utterance>& data, int num_ids,
                         const TrainOptions& options);

struct FinetuneReport {
  std::vector<StepStats> steps;
  int utterances_skipped = 0;
};

// Per batch: decode N-best with the current parameters (E-step), then one
// Adam step on the selected loss (M-step). Moments start fresh.
TrainState FinetuneStage(TrainState state, const std::vector<Utterance>& data,
                         LossKind kind, const FinetuneOptions& options,
                         const PieceInventory& inventory,
                         FinetuneReport* report = nullptr);

// Loss and logit gradient of one utterance for the given fine-tuning loss.
struct UtteranceObjective {
  double loss = 0.0;
  Matrix grad_logits;
  bool skipped = false;
  int segments_flagged = 0;
};
UtteranceObjective FinetuneObjective(const LogPosteriorGrid& grid,
                                     const Utterance& utt, LossKind kind,
                                     const FinetuneOptions& options,
                                     const PieceInventory& inventory);

void AdamUpdate(EncoderParams& params, AdamState& state,
                const EncoderParams& grads, const AdamOptions& options);

struct CheckpointMeta {
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// <file> holds the named matrices; <file>.meta holds "key value" lines.
void SaveCheckpoint(const TrainState& state, std::uint64_t config_hash,
                    const std::filesystem::path& file);
TrainState LoadCheckpoint(const std::filesystem::path& file,
                          CheckpointMeta* meta = nullptr);

}  // namespace fdt

#endif  // FDT_TRAIN_H_
