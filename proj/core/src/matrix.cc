// core/src/matrix.cc

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

#include "fdt/matrix.h"

#include <algorithm>

namespace fdt {

void Matrix::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

Matrix Matrix::row_range(std::size_t first, std::size_t count) const {
  Matrix out(count, cols_);
  std::copy_n(data_.begin() + first * cols_, count * cols_, out.data_.begin());
  return out;
}

}  // namespace fdt
