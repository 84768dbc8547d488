// core/include/fdt/experiment.h

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

#ifndef FDT_EXPERIMENT_H_
#define FDT_EXPERIMENT_H_

#include <vector>

#include "fdt/evaluate.h"
#include "fdt/synth.h"
#include "fdt/train.h"

namespace fdt {

struct ArmResult {
  LossKind kind = LossKind::kCtcControl;
  WerReport general;
  WerReport rare;
  EntropyReport entropy;
};

struct ExperimentResult {
  WerReport base_general;
  WerReport base_rare;
  EntropyReport base_entropy;
  std::vector<ArmResult> arms;  // one per LossKind, same step budget

  const ArmResult& arm(LossKind kind) const;
};

// Generate data, train the CTC baseline, then fine-tune one copy per loss
// kind on the fine-tuning split and evaluate each.
ExperimentResult RunExperiment(const SynthConfig& synth,
                               const TrainOptions& train,
                               const FinetuneOptions& finetune);

}  // namespace fdt

#endif  // FDT_EXPERIMENT_H_
