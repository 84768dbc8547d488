// core/src/grad_check.cc

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

#include "fdt/grad_check.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fdt/ctc.h"
#include "fdt/encoder.h"
#include "fdt/fdt_loss.h"
#include "fdt/nbest.h"
#include "fdt/seq_baselines.h"

namespace fdt {
namespace {

int Uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Matrix RandomMatrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                    double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = n(rng);
  return m;
}

PieceSeq RandomLabels(std::mt19937_64& rng, int length, int vocab) {
  PieceSeq out(length);
  for (PieceId& p : out) p = Uniform(rng, 1, vocab);
  return out;
}

// Single-piece words "a", "b", ... so word errors equal piece errors.
PieceInventory LetterInventory(int vocab) {
  std::vector<std::string> pieces = {std::string(kBlankString)};
  std::map<std::string, PieceSeq> entries;
  for (int i = 1; i <= vocab; ++i) {
    pieces.push_back(std::string(1, static_cast<char>('a' + i - 1)));
    entries[pieces.back()] = {i};
  }
  PieceInventory inv;
  inv.vocab = PieceVocab(pieces);
  inv.lexicon = Lexicon(entries, inv.vocab);
  return inv;
}

void Track(GradCheckResult& r, const Matrix& analytic,
           const std::function<double(const Matrix&)>& f, const Matrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double numeric = CentralDifference(f, x, i, j);
      r.max_rel_err =
          std::max(r.max_rel_err, RelativeError(analytic(i, j), numeric));
    }
  }
}

GradCheckResult Finish(GradCheckResult r) {
  r.passed = r.passed && r.max_rel_err <= r.tolerance;
  return r;
}

// Reference of 1-3 pieces plus an N-best list decoded from the same grid.
struct SequenceInstance {
  Matrix logits;
  TokenizedUtterance ref;
  NBestList nbest;
  PieceInventory inventory;
};

SequenceInstance RandomSequenceInstance(std::mt19937_64& rng) {
  SequenceInstance s;
  const int vocab = Uniform(rng, 2, 4);
  const int frames = Uniform(rng, 4, 8);
  s.inventory = LetterInventory(vocab);
  s.logits = RandomMatrix(rng, frames, vocab + 1, 1.5);
  PieceSeq pieces;
  do {
    pieces = RandomLabels(rng, Uniform(rng, 1, 3), vocab);
  } while (MinFramesFor(pieces) > static_cast<std::size_t>(frames));
  std::vector<std::string> words;
  for (PieceId p : pieces) words.push_back(s.inventory.vocab.piece(p));
  s.ref = Tokenize(words, s.inventory.lexicon, s.inventory.vocab);
  const auto grid = LogPosteriorGrid::FromLogits(s.logits);
  s.nbest = NBestPosteriors(PrefixBeamSearch(grid, 8, 4));
  return s;
}

}  // namespace

double RelativeError(double analytic, double numeric, double floor) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double CentralDifference(const std::function<double(const Matrix&)>& f,
                         Matrix x, std::size_t r, std::size_t c, double step) {
  const double x0 = x(r, c);
  x(r, c) = x0 + step;
  const double plus = f(x);
  x(r, c) = x0 - step;
  const double minus = f(x);
  return (plus - minus) / (2.0 * step);
}

GradCheckResult CheckCtcGradient(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  GradCheckResult r{"ctc_grad_logits", instances, 0.0, 1e-4, true};
  for (int i = 0; i < instances; ++i) {
    const int vocab = Uniform(rng, 1, 4);
    const int frames = Uniform(rng, 1, 8);
    PieceSeq labels;
    do {
      labels = RandomLabels(rng, Uniform(rng, 1, 3), vocab);
    } while (MinFramesFor(labels) > static_cast<std::size_t>(frames));
    const Matrix logits = RandomMatrix(rng, frames, vocab + 1, 1.5);
    const Matrix analytic =
        CtcGradLogits(LogPosteriorGrid::FromLogits(logits), labels);
    Track(r, analytic,
          [&](const Matrix& x) {
            return CtcForwardLoss(LogPosteriorGrid::FromLogits(x), labels);
          },
          logits);
  }
  return Finish(r);
}

ErrorSegment RandomFlaggedSegment(std::mt19937_64& rng, Matrix* log_potentials) {
  const int frames = Uniform(rng, 1, 6);
  const int vocab = Uniform(rng, 2, 4);
  ErrorSegment seg;
  seg.first_frame = 0;
  seg.last_frame = frames - 1;
  const int u = Uniform(rng, 1, std::min(frames, 2));
  std::vector<PieceId> ids(vocab);
  for (int i = 0; i < vocab; ++i) ids[i] = i + 1;
  std::shuffle(ids.begin(), ids.end(), rng);
  seg.ref_pieces.assign(ids.begin(), ids.begin() + u);
  const int free = vocab - u;
  const int e = free == 0 ? 0 : Uniform(rng, 0, std::min({free, frames, 2}));
  seg.err_pieces.assign(ids.begin() + u, ids.begin() + u + e);
  Matrix logits = RandomMatrix(rng, frames, vocab + 1, 1.5);
  *log_potentials = LogPosteriorGrid::FromLogits(logits).values();
  return seg;
}

GradCheckResult CheckSegmentGradient(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  GradCheckResult r{"segment_contrastive_grad", instances, 0.0, 1e-4, true};
  for (int i = 0; i < instances; ++i) {
    Matrix x;
    const ErrorSegment seg = RandomFlaggedSegment(rng, &x);
    const SegmentLossGrad lg =
        SegmentContrastiveLossGrad(LogPosteriorGrid::Unnormalized(x), seg);
    Track(r, lg.grad_logp,
          [&](const Matrix& m) {
            return SegmentContrastiveLossGrad(LogPosteriorGrid::Unnormalized(m),
                                              seg)
                .loss;
          },
          x);
    // Reference pieces only gain, error pieces only lose, others untouched.
    for (std::size_t t = 0; t < x.rows(); ++t) {
      for (std::size_t j = 1; j < x.cols(); ++j) {
        const PieceId id = static_cast<PieceId>(j);
        const double g = lg.grad_logp(t, j);
        const bool in_ref = std::count(seg.ref_pieces.begin(),
                                       seg.ref_pieces.end(), id) > 0;
        const bool in_err = std::count(seg.err_pieces.begin(),
                                       seg.err_pieces.end(), id) > 0;
        if ((in_ref && g > 0.0) || (in_err && g < 0.0) ||
            (!in_ref && !in_err && g != 0.0)) {
          r.passed = false;
        }
      }
    }
  }
  return Finish(r);
}

GradCheckResult CheckMmiGradient(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  GradCheckResult r{"mmi_grad_logits", instances, 0.0, 1e-3, true};
  for (int i = 0; i < instances; ++i) {
    const SequenceInstance s = RandomSequenceInstance(rng);
    const auto lg =
        MmiLossGrad(LogPosteriorGrid::FromLogits(s.logits), s.ref, s.nbest);
    Track(r, lg.grad_logits,
          [&](const Matrix& x) {
            return MmiLossGrad(LogPosteriorGrid::FromLogits(x), s.ref, s.nbest)
                .loss;
          },
          s.logits);
  }
  return Finish(r);
}

GradCheckResult CheckMwerGradient(std::uint64_t seed, int instances) {
  std::mt19937_64 rng(seed);
  GradCheckResult r{"mwer_grad_logits", instances, 0.0, 1e-3, true};
  for (int i = 0; i < instances; ++i) {
    const SequenceInstance s = RandomSequenceInstance(rng);
    const auto lg = MwerLossGrad(LogPosteriorGrid::FromLogits(s.logits), s.ref,
                                 s.nbest, s.inventory);
    Track(r, lg.grad_logits,
          [&](const Matrix& x) {
            return MwerLossGrad(LogPosteriorGrid::FromLogits(x), s.ref, s.nbest,
                                s.inventory)
                .loss;
          },
          s.logits);
  }
  return Finish(r);
}

GradCheckResult CheckEncoderGradient(std::uint64_t seed, int samples) {
  std::mt19937_64 rng(seed);
  GradCheckResult r{"encoder_backward", samples, 0.0, 1e-4, true};
  const EncoderConfig cfg{3, 4, 6, 4};
  EncoderParams params = EncoderParams::Random(cfg, seed);
  for (Matrix* m : params.tensors()) {
    for (double& v : m->values()) v += 0.1 * std::normal_distribution<>()(rng);
  }
  const Matrix features = RandomMatrix(rng, 7, cfg.input_dim, 1.0);
  const PieceSeq labels = {1, 2, 2};
  auto loss = [&](const EncoderParams& p) {
    return CtcForwardLoss(EncoderForward(p, features), labels);
  };
  const EncoderParams grads = EncoderBackward(
      params, features,
      CtcGradLogits(EncoderForward(params, features), labels));

  const auto names = params.tensors();
  const auto analytic = grads.tensors();
  for (int s = 0; s < samples; ++s) {
    const int k = Uniform(rng, 0, 3);
    const int idx = Uniform(rng, 0, static_cast<int>(names[k]->size()) - 1);
    EncoderParams probe = params;
    double& v = probe.tensors()[k]->values()[idx];
    const double v0 = v;
    const double step = 1e-5;
    v = v0 + step;
    const double plus = loss(probe);
    v = v0 - step;
    const double minus = loss(probe);
    const double numeric = (plus - minus) / (2.0 * step);
    r.max_rel_err = std::max(
        r.max_rel_err, RelativeError(analytic[k]->values()[idx], numeric));
  }
  return Finish(r);
}

std::vector<GradCheckResult> RunAllGradChecks(std::uint64_t seed) {
  return {CheckCtcGradient(seed), CheckSegmentGradient(seed),
          CheckMmiGradient(seed), CheckMwerGradient(seed),
          CheckEncoderGradient(seed)};
}

}  // namespace fdt
