// core/src/log_math.cc

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

#include "fdt/log_math.h"

#include <algorithm>

namespace fdt {

double LogSumExp(std::span<const double> values) {
  if (values.empty()) return kLogZero;
  const double max = *std::max_element(values.begin(), values.end());
  if (max == kLogZero || !std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

void LogSoftmaxInPlace(std::span<double> row) {
  const double norm = LogSumExp(row);
  for (double& v : row) v -= norm;
}

}  // namespace fdt
