// core/src/encoder.cc

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

#include "fdt/encoder.h"

#include <cmath>
#include <random>

#include "fdt/error.h"
#include "fdt/matrix_container.h"

namespace fdt {
namespace {

void CheckFeatures(const EncoderParams& params, const Matrix& features) {
  if (features.rows() == 0 ||
      features.cols() != static_cast<std::size_t>(params.config.input_dim)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "features must be T x " +
                    std::to_string(params.config.input_dim));
  }
}

// Left-context window ending at frame t, zero padded before frame 0.
void FillWindow(const EncoderConfig& cfg, const Matrix& features,
                std::size_t t, std::vector<double>& window) {
  window.assign(cfg.window_dim(), 0.0);
  for (int k = 0; k < cfg.context; ++k) {
    const long src = static_cast<long>(t) - (cfg.context - 1) + k;
    if (src < 0) continue;
    auto row = features.row(src);
    std::copy(row.begin(), row.end(), window.begin() + k * cfg.input_dim);
  }
}

}  // namespace

EncoderParams EncoderParams::Zeros(const EncoderConfig& config) {
  if (config.context < 1 || config.input_dim < 1 || config.hidden < 1 ||
      config.outputs < 2) {
    throw Error(ErrorCode::kConfig, "invalid encoder shape");
  }
  EncoderParams p;
  p.config = config;
  p.w1 = Matrix(config.hidden, config.window_dim());
  p.b1 = Matrix(1, config.hidden);
  p.w2 = Matrix(config.outputs, config.hidden);
  p.b2 = Matrix(1, config.outputs);
  return p;
}

EncoderParams EncoderParams::Random(const EncoderConfig& config,
                                    std::uint64_t seed) {
  EncoderParams p = Zeros(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> w1(0.0, 1.0 / std::sqrt(config.window_dim()));
  std::normal_distribution<double> w2(0.0, 1.0 / std::sqrt(config.hidden));
  for (double& v : p.w1.values()) v = w1(rng);
  for (double& v : p.w2.values()) v = w2(rng);
  RoundToFloat(p.w1);
  RoundToFloat(p.w2);
  return p;
}

EncoderTrace EncoderForwardTrace(const EncoderParams& params,
                                 const Matrix& features) {
  CheckFeatures(params, features);
  const EncoderConfig& cfg = params.config;
  const std::size_t T = features.rows();
  EncoderTrace trace;
  trace.hidden = Matrix(T, cfg.hidden);
  Matrix logits(T, cfg.outputs);
  std::vector<double> window;
  for (std::size_t t = 0; t < T; ++t) {
    FillWindow(cfg, features, t, window);
    auto h = trace.hidden.row(t);
    for (int i = 0; i < cfg.hidden; ++i) {
      auto w = params.w1.row(i);
      double z = params.b1(0, i);
      for (int k = 0; k < cfg.window_dim(); ++k) z += w[k] * window[k];
      h[i] = std::tanh(z);
    }
    for (int o = 0; o < cfg.outputs; ++o) {
      auto w = params.w2.row(o);
      double z = params.b2(0, o);
      for (int i = 0; i < cfg.hidden; ++i) z += w[i] * h[i];
      logits(t, o) = z;
    }
  }
  try {
    trace.grid = LogPosteriorGrid::FromLogits(logits);
  } catch (const Error& e) {
    throw Error(ErrorCode::kDivergence, e.what());
  }
  return trace;
}

LogPosteriorGrid EncoderForward(const EncoderParams& params,
                                const Matrix& features) {
  return EncoderForwardTrace(params, features).grid;
}

void EncoderBackwardAccumulate(const EncoderParams& params,
                               const Matrix& features,
                               const EncoderTrace& trace,
                               const Matrix& grad_logits,
                               EncoderParams& grads) {
  const EncoderConfig& cfg = params.config;
  if (grad_logits.rows() != features.rows() ||
      grad_logits.cols() != static_cast<std::size_t>(cfg.outputs)) {
    throw Error(ErrorCode::kDimensionMismatch, "grad_logits shape");
  }
  std::vector<double> window;
  std::vector<double> dz(cfg.hidden);
  for (std::size_t t = 0; t < features.rows(); ++t) {
    auto g = grad_logits.row(t);
    auto h = trace.hidden.row(t);
    std::fill(dz.begin(), dz.end(), 0.0);
    for (int o = 0; o < cfg.outputs; ++o) {
      if (g[o] == 0.0) continue;
      grads.b2(0, o) += g[o];
      auto dw = grads.w2.row(o);
      auto w = params.w2.row(o);
      for (int i = 0; i < cfg.hidden; ++i) {
        dw[i] += g[o] * h[i];
        dz[i] += g[o] * w[i];
      }
    }
    FillWindow(cfg, features, t, window);
    for (int i = 0; i < cfg.hidden; ++i) {
      const double d = dz[i] * (1.0 - h[i] * h[i]);
      if (d == 0.0) continue;
      grads.b1(0, i) += d;
      auto dw = grads.w1.row(i);
      for (int k = 0; k < cfg.window_dim(); ++k) dw[k] += d * window[k];
    }
  }
}

EncoderParams EncoderBackward(const EncoderParams& params,
                              const Matrix& features,
                              const Matrix& grad_logits) {
  const EncoderTrace trace = EncoderForwardTrace(params, features);
  EncoderParams grads = EncoderParams::Zeros(params.config);
  EncoderBackwardAccumulate(params, features, trace, grad_logits, grads);
  return grads;
}

}  // namespace fdt
