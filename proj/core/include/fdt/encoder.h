// core/include/fdt/encoder.h

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

#ifndef FDT_ENCODER_H_
#define FDT_ENCODER_H_

#include <array>
#include <cstdint>
#include <string_view>

#include "fdt/ctc.h"
#include "fdt/matrix.h"

namespace fdt {

struct EncoderConfig {
  int context = 5;  // frames t-context+1 .. t
  int input_dim = 16;
  int hidden = 64;
  int outputs = 0;  // V + 1

  int window_dim() const { return context * input_dim; }
  bool operator==(const EncoderConfig&) const = default;
};

// Causal windowed MLP: logits_t = w2 tanh(w1 [x_{t-c+1}; ...; x_t] + b1) + b2,
// with zero padding before the first frame. Also used to hold gradients and
// optimizer moments of the same shapes.
struct EncoderParams {
  EncoderConfig config;
  Matrix w1;  // hidden x window_dim
  Matrix b1;  // 1 x hidden
  Matrix w2;  // outputs x hidden
  Matrix b2;  // 1 x outputs

  static EncoderParams Zeros(const EncoderConfig& config);
  static EncoderParams Random(const EncoderConfig& config, std::uint64_t seed);

  static constexpr std::array<std::string_view, 4> kTensorNames = {
      "enc.w1", "enc.b1", "enc.w2", "enc.b2"};
  std::array<Matrix*, 4> tensors() { return {&w1, &b1, &w2, &b2}; }
  std::array<const Matrix*, 4> tensors() const { return {&w1, &b1, &w2, &b2}; }

  bool operator==(const EncoderParams&) const = default;
};

struct EncoderTrace {
  Matrix hidden;  // T x hidden, post-tanh
  LogPosteriorGrid grid;
};

EncoderTrace EncoderForwardTrace(const EncoderParams& params,
                                 const Matrix& features);
LogPosteriorGrid EncoderForward(const EncoderParams& params,
                                const Matrix& features);

// Gradient of sum_t <grad_logits_t, logits_t> with respect to all parameters.
EncoderParams EncoderBackward(const EncoderParams& params,
                              const Matrix& features,
                              const Matrix& grad_logits);
void EncoderBackwardAccumulate(const EncoderParams& params,
                               const Matrix& features,
                               const EncoderTrace& trace,
                               const Matrix& grad_logits,
                               EncoderParams& grads);

}  // namespace fdt

#endif  // FDT_ENCODER_H_
