// core/include/fdt/matrix_container.h

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

#ifndef FDT_MATRIX_CONTAINER_H_
#define FDT_MATRIX_CONTAINER_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fdt/matrix.h"

namespace fdt {

// Binary container of named float32 matrices:
//   "FDT1" | count u32 | { name_len u32 | name | rows u32 | cols u32 |
//   rows*cols f32 row-major } * count
// All integers and floats little-endian.
class MatrixContainer {
 public:
  struct Entry {
    std::string name;
    Matrix values;
  };

  // Throws kParse on a duplicate name.
  void add(std::string name, Matrix values);
  const Matrix* find(std::string_view name) const;
  const Matrix& at(std::string_view name) const;  // throws kParse
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

std::string SerializeContainer(const MatrixContainer& container);
MatrixContainer ParseContainer(std::string_view bytes);

void WriteContainer(const MatrixContainer& container,
                    const std::filesystem::path& file);
MatrixContainer ReadContainer(const std::filesystem::path& file);

// Rounds every entry to the nearest float32, the precision of the container.
void RoundToFloat(Matrix& m);

std::string ReadFileBytes(const std::filesystem::path& file);
void WriteFileBytes(const std::filesystem::path& file, std::string_view bytes);

}  // namespace fdt

#endif  // FDT_MATRIX_CONTAINER_H_
