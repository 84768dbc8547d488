// core/src/experiment.cc

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

#include "fdt/experiment.h"

#include "fdt/error.h"

namespace fdt {

const ArmResult& ExperimentResult::arm(LossKind kind) const {
  for (const ArmResult& a : arms) {
    if (a.kind == kind) return a;
  }
  throw Error(ErrorCode::kConfig, "experiment has no arm " +
                                      std::string(LossKindName(kind)));
}

ExperimentResult RunExperiment(const SynthConfig& synth,
                               const TrainOptions& train,
                               const FinetuneOptions& finetune) {
  const Dataset data = GenerateDataset(synth);
  const PieceInventory& inv = data.inventory;
  const TrainState base =
      TrainCtcStage(data.split("train"), inv.vocab.num_ids(), train);

  ExperimentResult result;
  const auto& general = data.split("eval_general");
  const auto& rare = data.split("eval_rare");
  const int workers = finetune.workers;
  result.base_general = Evaluate(base.params, general, inv, finetune.beam, 1,
                                 workers);
  result.base_rare = Evaluate(base.params, rare, inv, finetune.beam, 1, workers);
  result.base_entropy = EntropyReportFor(base.params, general, 20, workers);

  for (LossKind kind : {LossKind::kCtcControl, LossKind::kFdt, LossKind::kMmi,
                        LossKind::kMwer}) {
    const TrainState tuned =
        FinetuneStage(base, data.split("finetune"), kind, finetune, inv);
    ArmResult arm;
    arm.kind = kind;
    arm.general =
        Evaluate(tuned.params, general, inv, finetune.beam, 1, workers);
    arm.rare = Evaluate(tuned.params, rare, inv, finetune.beam, 1, workers);
    arm.entropy = EntropyReportFor(tuned.params, general, 20, workers);
    result.arms.push_back(std::move(arm));
  }
  return result;
}

}  // namespace fdt
