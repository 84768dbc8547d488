// core/src/train.cc

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

#include "fdt/train.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "fdt/error.h"
#include "fdt/fdt_loss.h"
#include "fdt/matrix_container.h"
#include "fdt/nbest.h"
#include "fdt/parallel.h"
#include "fdt/seq_baselines.h"

namespace fdt {
namespace {

std::vector<std::size_t> EpochOrder(std::size_t n, std::uint64_t seed,
                                    std::uint64_t epoch, std::uint64_t stream) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq seq{seed, epoch, stream};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void RoundParams(EncoderParams& p) {
  for (Matrix* m : p.tensors()) RoundToFloat(*m);
}

void AddScaled(EncoderParams& dst, const EncoderParams& src, double scale) {
  auto d = dst.tensors();
  auto s = src.tensors();
  for (std::size_t k = 0; k < d.size(); ++k) {
    auto dv = d[k]->values();
    auto sv = s[k]->values();
    for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += scale * sv[i];
  }
}

struct UtteranceResult {
  EncoderParams grads;
  UtteranceObjective objective;
};

void CheckFinite(double loss, std::uint64_t step) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kDivergence,
                "non-finite loss at step " + std::to_string(step));
  }
}

}  // namespace

std::string_view LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kFdt: return "fdt";
    case LossKind::kMmi: return "mmi";
    case LossKind::kMwer: return "mwer";
    case LossKind::kCtcControl: return "ctc-control";
  }
  return "unknown";
}

std::optional<LossKind> ParseLossKind(std::string_view name) {
  for (LossKind k : {LossKind::kFdt, LossKind::kMmi, LossKind::kMwer,
                     LossKind::kCtcControl}) {
    if (LossKindName(k) == name) return k;
  }
  return std::nullopt;
}

TrainState InitTrainState(const EncoderConfig& config, std::uint64_t seed) {
  TrainState state;
  state.params = EncoderParams::Random(config, seed);
  state.adam.m = EncoderParams::Zeros(config);
  state.adam.v = EncoderParams::Zeros(config);
  state.seed = seed;
  return state;
}

void AdamUpdate(EncoderParams& params, AdamState& state,
                const EncoderParams& grads, const AdamOptions& options) {
  ++state.t;
  const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.t));
  auto p = params.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  auto g = grads.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto pv = p[k]->values();
    auto mv = m[k]->values();
    auto vv = v[k]->values();
    auto gv = g[k]->values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = options.beta1 * mv[i] + (1.0 - options.beta1) * gv[i];
      vv[i] = options.beta2 * vv[i] + (1.0 - options.beta2) * gv[i] * gv[i];
      pv[i] -= options.lr * (mv[i] / c1) / (std::sqrt(vv[i] / c2) + options.eps);
    }
  }
  RoundParams(params);
  RoundParams(state.m);
  RoundParams(state.v);
}

TrainState TrainCtcStage(const std::vector<Utterance>& data, int num_ids,
                         const TrainOptions& options) {
  if (data.empty()) throw Error(ErrorCode::kConfig, "empty training set");
  EncoderConfig config{options.context,
                       static_cast<int>(data.front().features.cols()),
                       options.hidden, num_ids};
  return TrainCtcStage(InitTrainState(config, options.seed), data, options);
}

TrainState TrainCtcStage(TrainState state, const std::vector<Utterance>& data,
                         const TrainOptions& options) {
  if (data.empty()) throw Error(ErrorCode::kConfig, "empty training set");
  if (options.batch_size < 1 || options.epochs < 0) {
    throw Error(ErrorCode::kConfig, "batch_size and epochs must be positive");
  }
  const std::size_t batch = options.batch_size;
  const std::uint64_t per_epoch = (data.size() + batch - 1) / batch;
  const std::uint64_t total = per_epoch * options.epochs;

  std::uint64_t cached_epoch = ~0ULL;
  std::vector<std::size_t> order;
  while (state.step < total) {
    const std::uint64_t epoch = state.step / per_epoch;
    const std::uint64_t index = state.step % per_epoch;
    if (epoch != cached_epoch) {
      order = EpochOrder(data.size(), state.seed, epoch, 0);
      cached_epoch = epoch;
    }
    const std::size_t first = index * batch;
    const std::vector<std::size_t> members(
        order.begin() + first,
        order.begin() + std::min(first + batch, order.size()));

    const EncoderParams& params = state.params;
    auto one = [&](std::size_t i) {
      const Utterance& utt = data[members[i]];
      const EncoderTrace trace = EncoderForwardTrace(params, utt.features);
      CtcLossGrad ctc = CtcLossAndGrad(trace.grid, utt.ref.pieces);
      UtteranceResult r;
      r.grads = EncoderParams::Zeros(params.config);
      EncoderBackwardAccumulate(params, utt.features, trace, ctc.grad_logits,
                                r.grads);
      r.objective.loss = ctc.loss;
      return r;
    };
    const auto results =
        ParallelMap<UtteranceResult>(members.size(), options.workers, one);

    EncoderParams grads = EncoderParams::Zeros(state.params.config);
    const double scale = 1.0 / members.size();
    for (const UtteranceResult& r : results) {
      CheckFinite(r.objective.loss, state.step);
      AddScaled(grads, r.grads, scale);
      state.epoch_loss_sum += r.objective.loss;
      ++state.epoch_loss_count;
    }
    AdamUpdate(state.params, state.adam, grads, options.adam);
    ++state.step;
    if (state.step % per_epoch == 0) {
      state.epoch_losses.push_back(state.epoch_loss_sum /
                                   state.epoch_loss_count);
      state.epoch_loss_sum = 0.0;
      state.epoch_loss_count = 0;
    }
  }
  return state;
}

UtteranceObjective FinetuneObjective(const LogPosteriorGrid& grid,
                                     const Utterance& utt, LossKind kind,
                                     const FinetuneOptions& options,
                                     const PieceInventory& inventory) {
  UtteranceObjective out;
  CtcLossGrad ctc = CtcLossAndGrad(grid, utt.ref.pieces);
  if (kind == LossKind::kCtcControl) {
    out.loss = ctc.loss;
    out.grad_logits = std::move(ctc.grad_logits);
    return out;
  }

  const NBestList nbest =
      NBestPosteriors(PrefixBeamSearch(grid, options.beam, options.nbest));
  double disc_loss = 0.0;
  Matrix disc_grad;
  switch (kind) {
    case LossKind::kFdt: {
      FdtResult r = FdtUtteranceLossGrad(grid, utt.ref, nbest);
      out.segments_flagged = r.segments_flagged;
      if (r.utterance_skipped) {
        // Implicit data selection: nothing to learn from this utterance.
        out.skipped = true;
        out.grad_logits = Matrix(grid.frames(), grid.num_ids());
        return out;
      }
      disc_loss = r.loss;
      disc_grad = LogPosteriorGradToLogits(grid, r.grad_logp);
      break;
    }
    case LossKind::kMmi: {
      SequenceLossGrad r = MmiLossGrad(grid, utt.ref, nbest);
      disc_loss = r.loss;
      disc_grad = std::move(r.grad_logits);
      break;
    }
    case LossKind::kMwer: {
      SequenceLossGrad r = MwerLossGrad(grid, utt.ref, nbest, inventory);
      disc_loss = r.loss;
      disc_grad = std::move(r.grad_logits);
      break;
    }
    case LossKind::kCtcControl:
      break;
  }
  const double w = options.ctc_weight;
  out.loss = (1.0 - w) * disc_loss + w * ctc.loss;
  out.grad_logits = std::move(disc_grad);
  auto g = out.grad_logits.values();
  auto c = ctc.grad_logits.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (1.0 - w) * g[i] + w * c[i];
  return out;
}

TrainState FinetuneStage(TrainState state, const std::vector<Utterance>& data,
                         LossKind kind, const FinetuneOptions& options,
                         const PieceInventory& inventory,
                         FinetuneReport* report) {
  if (data.empty()) throw Error(ErrorCode::kConfig, "empty fine-tuning set");
  if (options.batch_size < 1 || options.epochs < 0) {
    throw Error(ErrorCode::kConfig, "batch_size and epochs must be positive");
  }
  state.adam.m = EncoderParams::Zeros(state.params.config);
  state.adam.v = EncoderParams::Zeros(state.params.config);
  state.adam.t = 0;

  const std::size_t batch = options.batch_size;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const auto order = EpochOrder(data.size(), options.seed, epoch, 1);
    for (std::size_t first = 0; first < order.size(); first += batch) {
      const std::vector<std::size_t> members(
          order.begin() + first,
          order.begin() + std::min(first + batch, order.size()));
      const EncoderParams& params = state.params;
      auto one = [&](std::size_t i) {
        const Utterance& utt = data[members[i]];
        const EncoderTrace trace = EncoderForwardTrace(params, utt.features);
        UtteranceResult r;
        r.objective =
            FinetuneObjective(trace.grid, utt, kind, options, inventory);
        r.grads = EncoderParams::Zeros(params.config);
        if (!r.objective.skipped) {
          EncoderBackwardAccumulate(params, utt.features, trace,
                                    r.objective.grad_logits, r.grads);
        }
        return r;
      };
      const auto results =
          ParallelMap<UtteranceResult>(members.size(), options.workers, one);

      EncoderParams grads = EncoderParams::Zeros(state.params.config);
      StepStats stats;
      const double scale = 1.0 / members.size();
      for (const UtteranceResult& r : results) {
        CheckFinite(r.objective.loss, state.step);
        AddScaled(grads, r.grads, scale);
        stats.loss += r.objective.loss;
        ++stats.utterances;
        stats.skipped += r.objective.skipped;
        stats.segments_flagged += r.objective.segments_flagged;
      }
      AdamUpdate(state.params, state.adam, grads, options.adam);
      ++state.step;
      if (report) {
        report->utterances_skipped += stats.skipped;
        report->steps.push_back(stats);
      }
    }
  }
  return state;
}

void SaveCheckpoint(const TrainState& state, std::uint64_t config_hash,
                    const std::filesystem::path& file) {
  MatrixContainer c;
  const auto names = EncoderParams::kTensorNames;
  const auto params = state.params.tensors();
  const auto m = state.adam.m.tensors();
  const auto v = state.adam.v.tensors();
  for (std::size_t k = 0; k < names.size(); ++k) {
    c.add(std::string(names[k]), *params[k]);
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    c.add("adam.m." + std::string(names[k]), *m[k]);
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    c.add("adam.v." + std::string(names[k]), *v[k]);
  }
  WriteContainer(c, file);

  const EncoderConfig& cfg = state.params.config;
  char buf[256];
  std::string text;
  std::snprintf(buf, sizeof(buf),
                "step %" PRIu64 "\nseed %" PRIu64 "\nconfig_hash %016" PRIx64
                "\nadam_t %" PRIu64 "\n",
                state.step, state.seed, config_hash, state.adam.t);
  text += buf;
  std::snprintf(buf, sizeof(buf),
                "context %d\ninput_dim %d\nhidden %d\noutputs %d\n",
                cfg.context, cfg.input_dim, cfg.hidden, cfg.outputs);
  text += buf;
  std::snprintf(buf, sizeof(buf), "epoch_loss_sum %.17g\nepoch_loss_count %" PRIu64 "\n",
                state.epoch_loss_sum, state.epoch_loss_count);
  text += buf;
  text += "epoch_losses";
  for (double l : state.epoch_losses) {
    std::snprintf(buf, sizeof(buf), " %.17g", l);
    text += buf;
  }
  text += "\n";
  WriteFileBytes(file.string() + ".meta", text);
}

TrainState LoadCheckpoint(const std::filesystem::path& file,
                          CheckpointMeta* meta) {
  const MatrixContainer c = ReadContainer(file);
  std::istringstream in(ReadFileBytes(file.string() + ".meta"));
  CheckpointMeta m;
  TrainState state;
  EncoderConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "step") fields >> m.step;
    else if (key == "seed") fields >> m.seed;
    else if (key == "config_hash") fields >> std::hex >> m.config_hash;
    else if (key == "adam_t") fields >> state.adam.t;
    else if (key == "context") fields >> cfg.context;
    else if (key == "input_dim") fields >> cfg.input_dim;
    else if (key == "hidden") fields >> cfg.hidden;
    else if (key == "outputs") fields >> cfg.outputs;
    else if (key == "epoch_loss_sum") fields >> state.epoch_loss_sum;
    else if (key == "epoch_loss_count") fields >> state.epoch_loss_count;
    else if (key == "epoch_losses") {
      for (double l; fields >> l;) state.epoch_losses.push_back(l);
    } else if (!key.empty()) {
      throw Error(ErrorCode::kParse, "unknown checkpoint key " + key);
    }
    if (fields.fail() && key != "epoch_losses") {
      throw Error(ErrorCode::kParse, "bad checkpoint line: " + line);
    }
  }
  state.params = EncoderParams::Zeros(cfg);
  state.adam.m = EncoderParams::Zeros(cfg);
  state.adam.v = EncoderParams::Zeros(cfg);
  const auto names = EncoderParams::kTensorNames;
  auto p = state.params.tensors();
  auto mm = state.adam.m.tensors();
  auto vv = state.adam.v.tensors();
  auto load = [&](const std::string& name, Matrix* dst) {
    const Matrix& src = c.at(name);
    if (src.rows() != dst->rows() || src.cols() != dst->cols()) {
      throw Error(ErrorCode::kParse, "checkpoint tensor " + name + " has wrong shape");
    }
    *dst = src;
  };
  for (std::size_t k = 0; k < names.size(); ++k) {
    load(std::string(names[k]), p[k]);
    load("adam.m." + std::string(names[k]), mm[k]);
    load("adam.v." + std::string(names[k]), vv[k]);
  }
  state.step = m.step;
  state.seed = m.seed;
  if (meta) *meta = m;
  return state;
}

}  // namespace fdt
