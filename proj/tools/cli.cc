// tools/cli.cc

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

#include "cli.h"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "fdt/encoder.h"
#include "fdt/error.h"
#include "fdt/evaluate.h"
#include "fdt/fdt_loss.h"
#include "fdt/grad_check.h"
#include "fdt/matrix_container.h"
#include "fdt/nbest.h"
#include "fdt/parallel.h"
#include "fdt/synth.h"
#include "fdt/train.h"
#include "json.hpp"
#include "run_config.h"

namespace fdt::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSubcommands[] = {"gen-data", "train-ctc", "finetune",
                                        "decode",   "align",     "eval-wer",
                                        "entropy",  "grad-check"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string Hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

void ErrorRecord(std::ostream& err, int code, std::string_view kind,
                 std::string_view message) {
  nlohmann::json rec = {{"error", kind}, {"exit_code", code},
                        {"message", message}};
  err << rec.dump() << "\n";
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return kExitConfig;
    case ErrorCode::kDivergence: return kExitDivergence;
    default: return kExitData;
  }
}

// Flags shared by every pipeline subcommand.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 1;

  void Add(CLI::App* app) {
    app->add_option("--config", config, "JSON run config")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "seed for all randomness");
    app->add_option("--workers", workers, "per-utterance worker threads")
        ->check(CLI::PositiveNumber);
  }

  RunConfig Load() const {
    RunConfig c = config.empty() ? RunConfig{} : LoadRunConfig(config);
    if (seed) c.seed = *seed;
    c.ApplySeed();
    c.train.workers = workers;
    c.finetune.workers = workers;
    return c;
  }
};

// Where log-posterior grids come from: a dataset split run through a
// checkpoint, or a container of precomputed grids keyed by utterance id.
struct GridSource {
  std::string data;
  std::string split;
  std::string ckpt;
  std::string grids;
  std::string vocab;
  std::string lexicon;
  std::string refs;

  void Add(CLI::App* app, std::string default_split) {
    split = std::move(default_split);
    app->add_option("--data", data, "dataset directory");
    app->add_option("--split", split, "dataset split")->capture_default_str();
    app->add_option("--ckpt", ckpt, "model checkpoint");
    app->add_option("--grids", grids, "container of log-posterior grids");
    app->add_option("--vocab", vocab, "piece vocabulary (with --grids)");
    app->add_option("--lexicon", lexicon, "lexicon (with --grids)");
    app->add_option("--refs", refs, "id<TAB>words references (with --grids)");
  }
};

struct Loaded {
  PieceInventory inventory;
  std::set<std::string> rare_words;
  std::vector<Utterance> utts;  // refs empty when none were given
  std::vector<LogPosteriorGrid> grids;
  bool has_refs = false;
};

std::map<std::string, std::vector<std::string>> ReadRefs(const fs::path& file) {
  std::map<std::string, std::vector<std::string>> refs;
  std::istringstream in(ReadFileBytes(file));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kParse, "reference line without tab: " + line);
    }
    refs[line.substr(0, tab)] = SplitWords(line.substr(tab + 1));
  }
  return refs;
}

// Loads the dataset split (and optionally its features) in data mode.
Dataset LoadSplitOnly(const GridSource& src, bool features) {
  Dataset d = LoadDataset(src.data, features);
  d.split(src.split);  // throws if absent
  return d;
}

Loaded LoadGrids(const GridSource& src, bool need_refs, int workers) {
  Loaded out;
  if (!src.grids.empty()) {
    if (!src.data.empty() || !src.ckpt.empty()) {
      throw Error(ErrorCode::kConfig, "--grids excludes --data/--ckpt");
    }
    if (src.vocab.empty()) throw Error(ErrorCode::kConfig, "--grids needs --vocab");
    out.inventory.vocab = ParseVocab(ReadFileBytes(src.vocab));
    if (!src.lexicon.empty()) {
      out.inventory.lexicon =
          ParseLexicon(ReadFileBytes(src.lexicon), out.inventory.vocab);
    }
    std::map<std::string, std::vector<std::string>> refs;
    if (!src.refs.empty()) refs = ReadRefs(src.refs);
    out.has_refs = !src.refs.empty();
    if (need_refs && !out.has_refs) {
      throw Error(ErrorCode::kConfig, "--grids needs --refs here");
    }
    const MatrixContainer container = ReadContainer(src.grids);
    for (const auto& entry : container.entries()) {
      Utterance u;
      u.id = entry.name;
      if (out.has_refs) {
        const auto it = refs.find(entry.name);
        if (it == refs.end()) {
          throw Error(ErrorCode::kParse, "no reference for " + entry.name);
        }
        u.ref = Tokenize(it->second, out.inventory.lexicon, out.inventory.vocab);
      }
      if (static_cast<int>(entry.values.cols()) != out.inventory.vocab.num_ids()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "grid width differs from vocabulary for " + entry.name);
      }
      out.grids.emplace_back(entry.values);
      out.utts.push_back(std::move(u));
    }
    return out;
  }
  if (src.data.empty() || src.ckpt.empty()) {
    throw Error(ErrorCode::kConfig, "need --data and --ckpt, or --grids");
  }
  Dataset d = LoadSplitOnly(src, true);
  out.inventory = d.inventory;
  out.rare_words = d.rare_words;
  out.utts = d.split(src.split);
  out.has_refs = true;
  const EncoderParams params = LoadCheckpoint(src.ckpt).params;
  if (params.config.outputs != out.inventory.vocab.num_ids()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "checkpoint outputs differ from the dataset vocabulary");
  }
  out.grids = ParallelMap<LogPosteriorGrid>(
      out.utts.size(), workers, [&](std::size_t i) {
        return EncoderForward(params, out.utts[i].features);
      });
  return out;
}

// Writes to --out when given, else to the report stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), out_(fallback) {}
  std::ostream& stream() { return path_.empty() ? out_ : buffer_; }
  void Close() {
    if (!path_.empty()) WriteFileBytes(path_, buffer_.str());
  }

 private:
  std::string path_;
  std::ostream& out_;
  std::ostringstream buffer_;
};

void PrintStats(std::ostream& out, const std::string& prefix,
                const WerReport& r) {
  out << prefix << "utterances\t" << r.utterances << "\n"
      << prefix << "ref_words\t" << r.stats.ref_len << "\n"
      << prefix << "substitutions\t" << r.stats.substitutions << "\n"
      << prefix << "insertions\t" << r.stats.insertions << "\n"
      << prefix << "deletions\t" << r.stats.deletions << "\n"
      << prefix << "wer\t" << Fixed(r.wer()) << "\n";
}

// "id<TAB>rank<TAB>log_score<TAB>pieces" with 1-based ranks.
std::map<std::string, PieceSeq> ReadTopOne(const fs::path& file,
                                           const PieceVocab& vocab) {
  std::map<std::string, PieceSeq> top;
  std::istringstream in(ReadFileBytes(file));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos;
         start = tab + 1) {
      f.push_back(line.substr(start, tab - start));
    }
    f.push_back(line.substr(start));
    if (f.size() != 4) throw Error(ErrorCode::kParse, "bad N-best line: " + line);
    if (f[1] != "1") continue;
    PieceSeq pieces;
    for (const std::string& p : SplitWords(f[3])) {
      const auto id = vocab.find(p);
      if (!id || *id == kBlankId) {
        throw Error(ErrorCode::kUnknownPiece, "unknown piece " + p);
      }
      pieces.push_back(*id);
    }
    top[f[0]] = std::move(pieces);
  }
  return top;
}

class Cli {
 public:
  explicit Cli(std::ostream& out) : out_(out) { Build(); }

  CLI::App& app() { return app_; }

 private:
  void Build() {
    app_.require_subcommand(1);
    app_.set_version_flag("--version", "fdt 0.1.0");

    {
      CLI::App* s = app_.add_subcommand("gen-data", "generate the synthetic task");
      common_.Add(s);
      s->add_option("--out", out_path_, "output directory")->required();
      s->callback([this] { GenData(); });
    }
    {
      CLI::App* s = app_.add_subcommand("train-ctc", "stage-1 CTC training");
      common_.Add(s);
      s->add_option("--data", data_, "dataset directory")->required();
      s->add_option("--out", out_path_, "checkpoint to write")->required();
      s->add_option("--init", init_, "checkpoint to resume from");
      s->callback([this] { TrainCtc(); });
    }
    {
      CLI::App* s = app_.add_subcommand("finetune", "discriminative fine-tuning");
      common_.Add(s);
      s->add_option("--data", data_, "dataset directory")->required();
      s->add_option("--split", split_, "split to fine-tune on")
          ->capture_default_str();
      s->add_option("--init", init_, "stage-1 checkpoint")->required();
      s->add_option("--loss", loss_, "fdt, mmi, mwer or ctc-control")
          ->required();
      s->add_option("--out", out_path_, "checkpoint to write")->required();
      s->callback([this] { Finetune(); });
    }
    {
      CLI::App* s = app_.add_subcommand("decode", "N-best prefix beam search");
      common_.Add(s);
      source_.Add(s, "eval_general");
      s->add_option("--beam", beam_, "beam width");
      s->add_option("--n", n_, "hypotheses per utterance");
      s->add_option("--out", out_path_, "N-best dump (default stdout)");
      s->callback([this] { Decode(); });
    }
    {
      CLI::App* s = app_.add_subcommand(
          "align", "Viterbi alignment, word segments and error segments");
      common_.Add(s);
      source_.Add(s, "eval_general");
      s->add_option("--beam", beam_, "beam width");
      s->add_option("--n", n_, "hypotheses per utterance");
      s->add_option("--out", out_path_, "alignment dump (default stdout)");
      s->callback([this] { Align(); });
    }
    {
      CLI::App* s = app_.add_subcommand("eval-wer", "word error rate report");
      common_.Add(s);
      source_.Add(s, "eval_general");
      s->add_option("--nbest", nbest_, "score this N-best dump's top entries");
      s->add_option("--beam", beam_, "beam width");
      s->callback([this] { EvalWer(); });
    }
    {
      CLI::App* s = app_.add_subcommand("entropy", "frame posterior entropy");
      common_.Add(s);
      source_.Add(s, "eval_general");
      s->add_option("--bins", bins_, "histogram bins");
      s->callback([this] { Entropy(); });
    }
    {
      CLI::App* s = app_.add_subcommand("grad-check",
                                        "finite-difference gradient suites");
      s->add_option("--seed", check_seed_, "seed")->capture_default_str();
      s->callback([this] { GradCheck(); });
    }
  }

 public:
  int status() const { return status_; }

 private:
  RunConfig Config() { return common_.Load(); }

  void GenData() {
    const RunConfig c = Config();
    const Dataset d = GenerateDataset(c.synth);
    WriteDataset(d, out_path_);
    for (const char* name : kSplitNames) {
      std::size_t frames = 0;
      for (const Utterance& u : d.split(name)) frames += u.features.rows();
      out_ << name << "\t" << d.split(name).size() << " utterances\t" << frames
           << " frames\n";
    }
  }

  void TrainCtc() {
    const RunConfig c = Config();
    const Dataset d = LoadDataset(data_);
    const auto& train = d.split("train");
    TrainState state;
    if (init_.empty()) {
      state = TrainCtcStage(train, d.inventory.vocab.num_ids(), c.train);
    } else {
      state = LoadCheckpoint(init_);
      if (state.params.config.outputs != d.inventory.vocab.num_ids()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "checkpoint outputs differ from the dataset vocabulary");
      }
      state = TrainCtcStage(std::move(state), train, c.train);
    }
    SaveCheckpoint(state, ConfigHash(c), out_path_);
    for (std::size_t e = 0; e < state.epoch_losses.size(); ++e) {
      out_ << "epoch\t" << e + 1 << "\t" << Num(state.epoch_losses[e]) << "\n";
    }
    out_ << "steps\t" << state.step << "\nconfig_hash\t" << Hex(ConfigHash(c))
         << "\n";
  }

  void Finetune() {
    const RunConfig c = Config();
    const auto kind = ParseLossKind(loss_);
    if (!kind) throw Error(ErrorCode::kConfig, "unknown loss " + loss_);
    const Dataset d = LoadDataset(data_);
    TrainState state = LoadCheckpoint(init_);
    if (state.params.config.outputs != d.inventory.vocab.num_ids()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "checkpoint outputs differ from the dataset vocabulary");
    }
    FinetuneReport report;
    state = FinetuneStage(std::move(state), d.split(split_), *kind, c.finetune,
                          d.inventory, &report);
    SaveCheckpoint(state, ConfigHash(c), out_path_);
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
      const StepStats& s = report.steps[i];
      out_ << "step\t" << i + 1 << "\t" << Num(s.loss) << "\t" << s.utterances
           << "\t" << s.skipped << "\t" << s.segments_flagged << "\n";
    }
    out_ << "loss\t" << LossKindName(*kind) << "\nskipped\t"
         << report.utterances_skipped << "\n";
  }

  void Decode() {
    const RunConfig c = Config();
    const int beam = beam_.value_or(c.decode_beam);
    const int n = n_.value_or(c.decode_n);
    const Loaded in = LoadGrids(source_, false, common_.workers);
    const auto lists = ParallelMap<std::vector<Hypothesis>>(
        in.grids.size(), common_.workers,
        [&](std::size_t i) { return PrefixBeamSearch(in.grids[i], beam, n); });
    Sink sink(out_path_, out_);
    for (std::size_t i = 0; i < lists.size(); ++i) {
      for (std::size_t r = 0; r < lists[i].size(); ++r) {
        sink.stream() << in.utts[i].id << "\t" << r + 1 << "\t"
                      << Num(lists[i][r].log_score) << "\t"
                      << JoinPieces(lists[i][r].pieces, in.inventory.vocab)
                      << "\n";
      }
    }
    sink.Close();
  }

  // Frames are printed 1-based and inclusive.
  void Align() {
    const RunConfig c = Config();
    const int beam = beam_.value_or(c.decode_beam);
    const int n = n_.value_or(c.decode_n);
    const Loaded in = LoadGrids(source_, true, common_.workers);
    const PieceVocab& vocab = in.inventory.vocab;
    auto piece = [&](PieceId id) { return vocab.piece(id); };
    auto join = [&](const PieceSeq& p) { return JoinPieces(p, vocab); };
    Sink sink(out_path_, out_);
    std::ostream& o = sink.stream();
    for (std::size_t i = 0; i < in.grids.size(); ++i) {
      const LogPosteriorGrid& grid = in.grids[i];
      const TokenizedUtterance& ref = in.utts[i].ref;
      const WordSegmentation seg = SegmentByWords(grid, ref);
      o << "utt\t" << in.utts[i].id << "\nframes\t" << grid.frames()
        << "\nalignment\t";
      for (std::size_t t = 0; t < seg.reference_alignment.tokens.size(); ++t) {
        o << (t ? " " : "") << piece(seg.reference_alignment.tokens[t]);
      }
      o << "\n";
      for (const WordFrameSpan& w : seg.words) {
        o << "word\t" << w.word_index + 1 << "\t" << ref.words[w.word_index]
          << "\t" << w.first_frame + 1 << "\t" << w.last_frame + 1 << "\t"
          << join(PieceSeq(ref.pieces.begin() + w.pieces.begin,
                           ref.pieces.begin() + w.pieces.end))
          << "\n";
      }
      const NBestList nbest = NBestPosteriors(PrefixBeamSearch(grid, beam, n));
      for (std::size_t r = 0; r < nbest.hyps.size(); ++r) {
        o << "hyp\t" << r + 1 << "\t" << Num(nbest.posteriors[r]) << "\t"
          << Num(nbest.hyps[r].log_score) << "\t" << join(nbest.hyps[r].pieces)
          << "\n";
        for (const ErrorSegment& e : DetectErrorSegments(
                 grid, ref, nbest.hyps[r], seg, nbest.posteriors[r])) {
          o << "segment\t" << r + 1 << "\t" << e.word_index + 1 << "\t"
            << e.first_frame + 1 << "\t" << e.last_frame + 1 << "\t"
            << join(e.ref_pieces) << "\t" << join(e.err_pieces) << "\n";
        }
      }
      const FdtResult fdt = FdtUtteranceLossGrad(grid, ref, nbest);
      o << "fdt_loss\t" << Num(fdt.loss) << "\t" << fdt.segments_flagged
        << "\n";
    }
    sink.Close();
  }

  void EvalWer() {
    const RunConfig c = Config();
    const int beam = beam_.value_or(c.decode_beam);
    Loaded in;
    std::vector<PieceSeq> hyps;
    if (!nbest_.empty()) {
      if (source_.data.empty()) throw Error(ErrorCode::kConfig, "--nbest needs --data");
      Dataset d = LoadSplitOnly(source_, false);
      in.inventory = d.inventory;
      in.rare_words = d.rare_words;
      in.utts = d.split(source_.split);
      const auto top = ReadTopOne(nbest_, in.inventory.vocab);
      for (const Utterance& u : in.utts) {
        const auto it = top.find(u.id);
        hyps.push_back(it == top.end() ? PieceSeq{} : it->second);
      }
    } else {
      in = LoadGrids(source_, true, common_.workers);
      const auto lists = ParallelMap<std::vector<Hypothesis>>(
          in.grids.size(), common_.workers,
          [&](std::size_t i) { return PrefixBeamSearch(in.grids[i], beam, 1); });
      for (const auto& l : lists) hyps.push_back(l.front().pieces);
    }
    out_ << "split\t" << (source_.grids.empty() ? source_.split : source_.grids)
         << "\n";
    PrintStats(out_, "", ScoreTranscripts(in.utts, hyps, in.inventory));
    // Utterances whose reference contains a rare word.
    std::vector<Utterance> rare_utts;
    std::vector<PieceSeq> rare_hyps;
    for (std::size_t i = 0; i < in.utts.size(); ++i) {
      for (const std::string& w : in.utts[i].ref.words) {
        if (in.rare_words.count(w)) {
          rare_utts.push_back(in.utts[i]);
          rare_hyps.push_back(hyps[i]);
          break;
        }
      }
    }
    PrintStats(out_, "rare_",
               ScoreTranscripts(rare_utts, rare_hyps, in.inventory));
  }

  void Entropy() {
    const RunConfig c = Config();
    const Loaded in = LoadGrids(source_, false, common_.workers);
    const EntropyReport r = EntropyOfGrids(in.grids, bins_.value_or(c.entropy_bins));
    out_ << "mean\t" << Num(r.mean) << "\nframes\t" << r.frames << "\n";
    for (std::size_t b = 0; b < r.counts.size(); ++b) {
      out_ << "bin\t" << Fixed(r.bin_edges[b]) << "\t"
           << Fixed(r.bin_edges[b + 1]) << "\t" << r.counts[b] << "\n";
    }
  }

  void GradCheck() {
    bool ok = true;
    for (const GradCheckResult& r : RunAllGradChecks(check_seed_)) {
      out_ << r.name << "\t" << r.instances << "\t" << Num(r.max_rel_err)
           << "\t" << Num(r.tolerance) << "\t" << (r.passed ? "PASS" : "FAIL")
           << "\n";
      ok = ok && r.passed;
    }
    if (!ok) status_ = kExitFailure;
  }

  std::ostream& out_;
  CLI::App app_{"Focused discriminative training lab"};
  Common common_;
  GridSource source_;
  std::string out_path_;
  std::string data_;
  std::string split_ = "finetune";
  std::string init_;
  std::string loss_;
  std::string nbest_;
  std::optional<int> beam_;
  std::optional<int> n_;
  std::optional<int> bins_;
  std::uint64_t check_seed_ = 7;
  int status_ = kExitOk;
};

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  if (args.empty() || args[0].empty() ||
      (args[0][0] != '-' && std::find(std::begin(kSubcommands),
                                      std::end(kSubcommands),
                                      args[0]) == std::end(kSubcommands))) {
    ErrorRecord(err, kExitUnknownCommand, "UnknownSubcommand",
                args.empty() ? "no subcommand given"
                             : "unknown subcommand " + args[0]);
    return kExitUnknownCommand;
  }
  auto cli = std::make_unique<Cli>(out);
  std::vector<std::string> argv_storage = {"fdt"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());
  try {
    cli->app().parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return cli->app().exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    ErrorRecord(err, kExitConfig, "Usage", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    const int code = ExitCodeFor(e.code());
    ErrorRecord(err, code, ErrorCodeName(e.code()), e.what());
    return code;
  } catch (const std::exception& e) {
    ErrorRecord(err, kExitFailure, "Internal", e.what());
    return kExitFailure;
  }
  return cli->status();
}

}  // namespace fdt::cli
