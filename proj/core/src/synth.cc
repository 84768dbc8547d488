// core/src/synth.cc

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

#include "fdt/synth.h"

#include <algorithm>
#include <cstdio>
#include <random>

#include "fdt/error.h"
#include "fdt/matrix_container.h"

namespace fdt {
namespace {

constexpr std::string_view kConsonants = "bdgklmnprstv";
constexpr std::string_view kRareConsonants = "fhjwxz";
constexpr std::string_view kVowels = "aeiou";

std::vector<std::string> Syllables(std::string_view consonants) {
  std::vector<std::string> out;
  for (char c : consonants) {
    for (char v : kVowels) out.push_back({c, v});
  }
  return out;
}

bool IsPrefix(const PieceSeq& a, const PieceSeq& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

int UniformInt(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct WordInventory {
  std::vector<std::string> common;
  std::vector<std::string> rare;
};

class UtteranceSampler {
 public:
  UtteranceSampler(const SynthConfig& config, const PieceInventory& inventory,
                   const WordInventory& words, const Matrix& prototypes)
      : config_(config),
        inventory_(inventory),
        words_(words),
        prototypes_(prototypes) {}

  // rare_fraction < 0 forces exactly one rare word per utterance.
  Utterance Sample(std::mt19937_64& rng, std::string id,
                   double rare_fraction) const {
    const int n = UniformInt(rng, config_.min_words, config_.max_words);
    const int forced = rare_fraction < 0 ? UniformInt(rng, 0, n - 1) : -1;
    std::vector<std::string> words;
    for (int k = 0; k < n; ++k) {
      const bool rare =
          forced >= 0 ? k == forced
                      : std::bernoulli_distribution(rare_fraction)(rng);
      const auto& pool = rare ? words_.rare : words_.common;
      words.push_back(pool[UniformInt(rng, 0, static_cast<int>(pool.size()) - 1)]);
    }

    Utterance utt;
    utt.id = std::move(id);
    utt.ref = Tokenize(words, inventory_.lexicon, inventory_.vocab);

    std::vector<PieceId> frames;
    auto silence = [&](int min_frames) {
      const int len = std::max(
          min_frames,
          UniformInt(rng, config_.silence_min_frames, config_.silence_max_frames));
      frames.insert(frames.end(), len, kBlankId);
    };
    silence(0);
    for (std::size_t k = 0; k < utt.ref.word_spans.size(); ++k) {
      const WordSpan span = utt.ref.word_spans[k];
      if (k > 0) {
        // Identical pieces meeting at a word boundary need a pause to be
        // distinguishable from one long piece.
        const bool repeat =
            utt.ref.pieces[span.begin] == utt.ref.pieces[span.begin - 1];
        silence(repeat ? 1 : 0);
      }
      for (std::size_t j = span.begin; j < span.end; ++j) {
        const int len = UniformInt(rng, config_.piece_min_frames,
                                   config_.piece_max_frames);
        frames.insert(frames.end(), len, utt.ref.pieces[j]);
      }
    }
    silence(0);

    std::normal_distribution<double> noise(0.0, config_.noise_sigma);
    utt.features = Matrix(frames.size(), config_.feature_dim);
    for (std::size_t t = 0; t < frames.size(); ++t) {
      for (int i = 0; i < config_.feature_dim; ++i) {
        utt.features(t, i) = prototypes_(frames[t], i) + noise(rng);
      }
    }
    RoundToFloat(utt.features);
    return utt;
  }

 private:
  const SynthConfig& config_;
  const PieceInventory& inventory_;
  const WordInventory& words_;
  const Matrix& prototypes_;
};

}  // namespace

void SynthConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfig, what);
  };
  require(feature_dim > 0, "feature_dim must be positive");
  require(common_words > 0 && rare_words > 0, "word counts must be positive");
  require(rare_words <= common_words, "rare_words must not exceed common_words");
  require(common_pieces >= 2 &&
              common_pieces <= static_cast<int>(Syllables(kConsonants).size()),
          "common_pieces out of range");
  require(rare_words <= static_cast<int>(Syllables(kRareConsonants).size()),
          "too many rare words");
  require(rare_train_fraction >= 0.0 && rare_train_fraction <= 1.0,
          "rare_train_fraction must be in [0, 1]");
  require(piece_min_frames >= 1 && piece_min_frames <= piece_max_frames,
          "bad piece duration range");
  require(silence_min_frames >= 0 && silence_min_frames <= silence_max_frames,
          "bad silence range");
  require(noise_sigma >= 0.0 && confusability_alpha >= 0.0,
          "noise_sigma and confusability_alpha must be non-negative");
  require(train_size > 0 && finetune_size > 0 && eval_general_size > 0 &&
              eval_rare_size > 0,
          "split sizes must be positive");
  require(min_words >= 1 && min_words <= max_words, "bad words_per_utterance");
}

const std::vector<Utterance>& Dataset::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) throw Error(ErrorCode::kParse, "no split " + name);
  return it->second;
}

Dataset GenerateDataset(const SynthConfig& config) {
  config.Validate();
  std::mt19937_64 rng(config.seed);

  std::vector<std::string> common_pieces = Syllables(kConsonants);
  std::shuffle(common_pieces.begin(), common_pieces.end(), rng);
  common_pieces.resize(config.common_pieces);
  std::vector<std::string> rare_pieces = Syllables(kRareConsonants);
  std::shuffle(rare_pieces.begin(), rare_pieces.end(), rng);
  rare_pieces.resize(config.rare_words);

  std::vector<std::string> vocab_strings = {std::string(kBlankString)};
  vocab_strings.insert(vocab_strings.end(), common_pieces.begin(),
                       common_pieces.end());
  vocab_strings.insert(vocab_strings.end(), rare_pieces.begin(),
                       rare_pieces.end());
  Dataset dataset;
  dataset.inventory.vocab = PieceVocab(vocab_strings);
  const PieceVocab& vocab = dataset.inventory.vocab;

  // Row 0 (silence) stays at the origin.
  std::normal_distribution<double> unit(0.0, 1.0);
  Matrix prototypes(vocab.num_ids(), config.feature_dim);
  for (int id = 1; id <= config.common_pieces; ++id) {
    for (double& v : prototypes.row(id)) v = unit(rng);
  }

  // Common words: 2-3 pieces, no adjacent repeats, prefix-free so a piece
  // string splits back into words unambiguously.
  std::vector<PieceSeq> common_seqs;
  int attempts = 0;
  while (static_cast<int>(common_seqs.size()) < config.common_words) {
    if (++attempts > 100000) {
      throw Error(ErrorCode::kConfig, "cannot build a prefix-free lexicon");
    }
    PieceSeq seq(UniformInt(rng, 2, 3));
    for (std::size_t i = 0; i < seq.size(); ++i) {
      do {
        seq[i] = UniformInt(rng, 1, config.common_pieces);
      } while (i > 0 && seq[i] == seq[i - 1]);
    }
    const bool clash = std::any_of(
        common_seqs.begin(), common_seqs.end(), [&](const PieceSeq& other) {
          return IsPrefix(seq, other) || IsPrefix(other, seq);
        });
    if (!clash) common_seqs.push_back(seq);
  }

  std::map<std::string, PieceSeq> entries;
  WordInventory words;
  auto spell = [&](const PieceSeq& seq) {
    std::string w;
    for (PieceId id : seq) w += vocab.piece(id);
    return w;
  };
  for (const PieceSeq& seq : common_seqs) {
    words.common.push_back(spell(seq));
    entries.emplace(words.common.back(), seq);
  }
  for (int r = 0; r < config.rare_words; ++r) {
    PieceSeq seq = common_seqs[r];
    const int pos = UniformInt(rng, 0, static_cast<int>(seq.size()) - 1);
    const PieceId rare_id = config.common_pieces + 1 + r;
    for (int i = 0; i < config.feature_dim; ++i) {
      prototypes(rare_id, i) =
          prototypes(seq[pos], i) + config.confusability_alpha * unit(rng);
    }
    seq[pos] = rare_id;
    words.rare.push_back(spell(seq));
    entries.emplace(words.rare.back(), seq);
    dataset.rare_words.insert(words.rare.back());
  }
  dataset.inventory.lexicon = Lexicon(std::move(entries), vocab);

  const UtteranceSampler sampler(config, dataset.inventory, words, prototypes);
  const int sizes[] = {config.train_size, config.finetune_size,
                       config.eval_general_size, config.eval_rare_size};
  for (int s = 0; s < 4; ++s) {
    const std::string name = kSplitNames[s];
    std::seed_seq seq{static_cast<std::uint64_t>(config.seed),
                      static_cast<std::uint64_t>(s + 1)};
    std::mt19937_64 split_rng(seq);
    const double rare_fraction =
        name == "eval_rare" ? -1.0 : config.rare_train_fraction;
    std::vector<Utterance>& utts = dataset.splits[name];
    for (int i = 0; i < sizes[s]; ++i) {
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%05d", name.c_str(), i);
      utts.push_back(sampler.Sample(split_rng, id, rare_fraction));
    }
  }
  return dataset;
}

void WriteDataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "feats");
  WriteVocab(dataset.inventory.vocab, dir / "vocab.txt");
  WriteLexicon(dataset.inventory.lexicon, dataset.inventory.vocab,
               dir / "lexicon.txt");
  std::string rare;
  for (const std::string& w : dataset.rare_words) rare += w + "\n";
  WriteFileBytes(dir / "rare_words.txt", rare);

  for (const auto& [name, utts] : dataset.splits) {
    const std::string feature_path = "feats/" + name + ".fdt";
    std::string manifest;
    MatrixContainer feats;
    for (const Utterance& utt : utts) {
      manifest += utt.id + "\t" + feature_path + "\t";
      for (std::size_t k = 0; k < utt.ref.words.size(); ++k) {
        if (k) manifest += ' ';
        manifest += utt.ref.words[k];
      }
      manifest += "\n";
      feats.add(utt.id, utt.features);
    }
    WriteFileBytes(dir / (name + ".tsv"), manifest);
    WriteContainer(feats, dir / feature_path);
  }
}

std::vector<ManifestRecord> ReadManifest(const std::filesystem::path& file) {
  const std::string text = ReadFileBytes(file);
  std::vector<ManifestRecord> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::size_t a = line.find('\t');
    const std::size_t b =
        a == std::string_view::npos ? a : line.find('\t', a + 1);
    if (b == std::string_view::npos) {
      throw Error(ErrorCode::kParse, file.string() + ":" +
                                         std::to_string(line_no) +
                                         ": expected 3 tab-separated fields");
    }
    ManifestRecord rec;
    rec.id = std::string(line.substr(0, a));
    rec.feature_path = std::string(line.substr(a + 1, b - a - 1));
    rec.words = SplitWords(line.substr(b + 1));
    if (rec.words.empty()) {
      throw Error(ErrorCode::kParse, "utterance " + rec.id + " has no words");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

Dataset LoadDataset(const std::filesystem::path& dir, bool load_features) {
  Dataset dataset;
  dataset.inventory = LoadLexicon(dir / "vocab.txt", dir / "lexicon.txt");
  if (std::filesystem::exists(dir / "rare_words.txt")) {
    for (std::string& w : SplitWords(ReadFileBytes(dir / "rare_words.txt"))) {
      dataset.rare_words.insert(std::move(w));
    }
  }
  std::vector<std::filesystem::path> manifests;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tsv") {
      manifests.push_back(entry.path());
    }
  }
  std::sort(manifests.begin(), manifests.end());

  std::map<std::string, MatrixContainer> containers;
  for (const auto& manifest : manifests) {
    std::vector<Utterance>& utts =
        dataset.splits[manifest.stem().string()];
    for (ManifestRecord& rec : ReadManifest(manifest)) {
      Utterance utt;
      utt.id = rec.id;
      utt.ref = Tokenize(rec.words, dataset.inventory.lexicon,
                         dataset.inventory.vocab);
      if (load_features) {
        auto it = containers.find(rec.feature_path);
        if (it == containers.end()) {
          it = containers
                   .emplace(rec.feature_path,
                            ReadContainer(dir / rec.feature_path))
                   .first;
        }
        utt.features = it->second.at(rec.id);
      }
      utts.push_back(std::move(utt));
    }
  }
  return dataset;
}

}  // namespace fdt
