// tools/run_config.h

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

#ifndef FDT_TOOLS_RUN_CONFIG_H_
#define FDT_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fdt/synth.h"
#include "fdt/train.h"

namespace fdt::cli {

// Everything a pipeline run depends on besides its input files. One seed
// drives data generation, initialization and shuffling.
struct RunConfig {
  std::uint64_t seed = 1;
  SynthConfig synth;
  TrainOptions train;
  FinetuneOptions finetune;
  int decode_beam = 16;
  int decode_n = 4;
  int entropy_bins = 20;

  // Copies `seed` into the per-stage options.
  void ApplySeed();
};

// JSON document with sections "synth", "train", "finetune", "decode" and
// "entropy". Missing keys keep their defaults; unknown keys, wrong types and
// invalid values throw kConfig.
RunConfig ParseRunConfig(std::string_view json_text);
RunConfig LoadRunConfig(const std::filesystem::path& file);
std::string RunConfigToJson(const RunConfig& config);

// 64-bit FNV-1a of the canonical JSON form.
std::uint64_t Fnv1a64(std::string_view bytes);
std::uint64_t ConfigHash(const RunConfig& config);

}  // namespace fdt::cli

#endif  // FDT_TOOLS_RUN_CONFIG_H_
