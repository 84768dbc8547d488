// tools/run_config.cc

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

#include "run_config.h"

#include <set>

#include "fdt/error.h"
#include "fdt/matrix_container.h"
#include "json.hpp"

namespace fdt::cli {
namespace {

using nlohmann::json;

// Visits every configurable field under its dotted key. The reader and the
// writer share this list so they cannot drift apart.
template <typename V>
void VisitFields(RunConfig& c, V&& v) {
  v("seed", c.seed);
  SynthConfig& s = c.synth;
  v("synth.feature_dim", s.feature_dim);
  v("synth.common_words", s.common_words);
  v("synth.rare_words", s.rare_words);
  v("synth.common_pieces", s.common_pieces);
  v("synth.rare_train_fraction", s.rare_train_fraction);
  v("synth.piece_min_frames", s.piece_min_frames);
  v("synth.piece_max_frames", s.piece_max_frames);
  v("synth.silence_min_frames", s.silence_min_frames);
  v("synth.silence_max_frames", s.silence_max_frames);
  v("synth.noise_sigma", s.noise_sigma);
  v("synth.confusability_alpha", s.confusability_alpha);
  v("synth.train_size", s.train_size);
  v("synth.finetune_size", s.finetune_size);
  v("synth.eval_general_size", s.eval_general_size);
  v("synth.eval_rare_size", s.eval_rare_size);
  v("synth.min_words", s.min_words);
  v("synth.max_words", s.max_words);
  TrainOptions& t = c.train;
  v("train.lr", t.adam.lr);
  v("train.beta1", t.adam.beta1);
  v("train.beta2", t.adam.beta2);
  v("train.eps", t.adam.eps);
  v("train.batch_size", t.batch_size);
  v("train.epochs", t.epochs);
  v("train.context", t.context);
  v("train.hidden", t.hidden);
  FinetuneOptions& f = c.finetune;
  v("finetune.lr", f.adam.lr);
  v("finetune.beta1", f.adam.beta1);
  v("finetune.beta2", f.adam.beta2);
  v("finetune.eps", f.adam.eps);
  v("finetune.batch_size", f.batch_size);
  v("finetune.epochs", f.epochs);
  v("finetune.ctc_weight", f.ctc_weight);
  v("finetune.beam", f.beam);
  v("finetune.nbest", f.nbest);
  v("decode.beam", c.decode_beam);
  v("decode.n", c.decode_n);
  v("entropy.bins", c.entropy_bins);
}

json::json_pointer Pointer(std::string_view dotted) {
  std::string p = "/";
  for (char ch : dotted) p += ch == '.' ? '/' : ch;
  return json::json_pointer(p);
}

void CollectLeaves(const json& j, const std::string& prefix,
                   std::set<std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object() && !value.empty()) {
      CollectLeaves(value, name, out);
    } else {
      out.insert(name);
    }
  }
}

void Check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kConfig, what);
}

void Validate(const RunConfig& c) {
  c.synth.Validate();
  Check(c.train.adam.lr >= 0.0 && c.finetune.adam.lr >= 0.0,
        "learning rates must be non-negative");
  Check(c.train.batch_size >= 1 && c.finetune.batch_size >= 1,
        "batch sizes must be positive");
  Check(c.train.epochs >= 0 && c.finetune.epochs >= 0,
        "epoch counts must be non-negative");
  Check(c.train.context >= 1 && c.train.hidden >= 1,
        "encoder context and hidden size must be positive");
  Check(c.finetune.ctc_weight >= 0.0 && c.finetune.ctc_weight <= 1.0,
        "finetune.ctc_weight must lie in [0, 1]");
  Check(c.finetune.beam >= c.finetune.nbest && c.finetune.nbest >= 1,
        "finetune needs beam >= nbest >= 1");
  Check(c.decode_beam >= c.decode_n && c.decode_n >= 1,
        "decode needs beam >= n >= 1");
  Check(c.entropy_bins >= 1, "entropy.bins must be positive");
}

}  // namespace

void RunConfig::ApplySeed() {
  synth.seed = seed;
  train.seed = seed;
  finetune.seed = seed;
}

RunConfig ParseRunConfig(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config is not JSON: ") + e.what());
  }
  Check(doc.is_object(), "config must be a JSON object");

  RunConfig config;
  std::set<std::string> known;
  VisitFields(config, [&](std::string_view key, auto& field) {
    known.emplace(key);
    const json::json_pointer ptr = Pointer(key);
    if (!doc.contains(ptr)) return;
    try {
      doc.at(ptr).get_to(field);
    } catch (const json::exception&) {
      throw Error(ErrorCode::kConfig, "bad value for " + std::string(key));
    }
  });
  std::set<std::string> given;
  CollectLeaves(doc, "", given);
  for (const std::string& key : given) {
    Check(known.count(key) > 0, "unknown config key " + key);
  }
  config.ApplySeed();
  Validate(config);
  return config;
}

RunConfig LoadRunConfig(const std::filesystem::path& file) {
  std::string text;
  try {
    text = ReadFileBytes(file);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return ParseRunConfig(text);
}

std::string RunConfigToJson(const RunConfig& config) {
  json doc = json::object();
  RunConfig copy = config;
  VisitFields(copy, [&](std::string_view key, auto& field) {
    doc[Pointer(key)] = field;
  });
  return doc.dump(2) + "\n";
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ConfigHash(const RunConfig& config) {
  return Fnv1a64(RunConfigToJson(config));
}

}  // namespace fdt::cli
