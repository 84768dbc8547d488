// core/include/fdt/synth.h

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

#ifndef FDT_SYNTH_H_
#define FDT_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fdt/matrix.h"
#include "fdt/tokenizer.h"

namespace fdt {

// Synthetic rare-word task. Every piece has a Gaussian prototype; frames of a
// piece are noisy copies of it. Each rare word is a common "twin" with one
// piece swapped for a rare piece whose prototype sits close to the piece it
// replaces, so an undertrained model hears the twin instead.
struct SynthConfig {
  std::uint64_t seed = 1;
  int feature_dim = 16;
  int common_words = 40;
  int rare_words = 8;
  int common_pieces = 24;
  double rare_train_fraction = 0.02;
  int piece_min_frames = 2;
  int piece_max_frames = 4;
  int silence_min_frames = 0;
  int silence_max_frames = 2;
  double noise_sigma = 0.5;
  double confusability_alpha = 0.3;
  int train_size = 2000;
  int finetune_size = 500;
  int eval_general_size = 200;
  int eval_rare_size = 200;
  int min_words = 3;
  int max_words = 8;

  void Validate() const;  // throws kConfig
};

struct Utterance {
  std::string id;
  TokenizedUtterance ref;
  Matrix features;  // T x feature_dim, float32-representable
};

inline constexpr const char* kSplitNames[] = {"train", "finetune",
                                              "eval_general", "eval_rare"};

struct Dataset {
  PieceInventory inventory;
  std::set<std::string> rare_words;
  std::map<std::string, std::vector<Utterance>> splits;

  const std::vector<Utterance>& split(const std::string& name) const;
};

Dataset GenerateDataset(const SynthConfig& config);

// Layout: vocab.txt, lexicon.txt, rare_words.txt, <split>.tsv manifests
// ("id<TAB>feature path<TAB>words") and feats/<split>.fdt containers keyed by
// utterance id.
void WriteDataset(const Dataset& dataset, const std::filesystem::path& dir);
// Loads every <name>.tsv manifest in `dir` as split <name>.
Dataset LoadDataset(const std::filesystem::path& dir,
                    bool load_features = true);

// Reads one manifest without touching feature files.
struct ManifestRecord {
  std::string id;
  std::string feature_path;
  std::vector<std::string> words;
};
std::vector<ManifestRecord> ReadManifest(const std::filesystem::path& file);

}  // namespace fdt

#endif  // FDT_SYNTH_H_
