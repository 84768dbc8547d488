// core/include/fdt/grad_check.h

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

#ifndef FDT_GRAD_CHECK_H_
#define FDT_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fdt/matrix.h"

namespace fdt {

// |a - b| / max(|a|, |b|, floor). The floor keeps entries whose true
// gradient is zero from dominating the statistic.
double RelativeError(double analytic, double numeric, double floor = 1e-4);

// Central difference of f along entry (r, c) of x.
double CentralDifference(const std::function<double(const Matrix&)>& f,
                         Matrix x, std::size_t r, std::size_t c,
                         double step = 1e-5);

struct GradCheckResult {
  std::string name;
  int instances = 0;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

GradCheckResult CheckCtcGradient(std::uint64_t seed, int instances = 100);
GradCheckResult CheckSegmentGradient(std::uint64_t seed, int instances = 100);
GradCheckResult CheckMmiGradient(std::uint64_t seed, int instances = 20);
GradCheckResult CheckMwerGradient(std::uint64_t seed, int instances = 20);
GradCheckResult CheckEncoderGradient(std::uint64_t seed, int samples = 50);

std::vector<GradCheckResult> RunAllGradChecks(std::uint64_t seed);

}  // namespace fdt

#endif  // FDT_GRAD_CHECK_H_
