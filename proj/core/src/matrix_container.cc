// core/src/matrix_container.cc

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

#include "fdt/matrix_container.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fdt/error.h"

namespace fdt {
namespace {

constexpr char kMagic[4] = {'F', 'D', 'T', '1'};

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kParse, "matrix container truncated");
    }
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void MatrixContainer::add(std::string name, Matrix values) {
  if (!index_.emplace(name, entries_.size()).second) {
    throw Error(ErrorCode::kParse, "duplicate matrix " + name);
  }
  entries_.push_back({std::move(name), std::move(values)});
}

const Matrix* MatrixContainer::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second].values;
}

const Matrix& MatrixContainer::at(std::string_view name) const {
  const Matrix* m = find(name);
  if (!m) throw Error(ErrorCode::kParse, "missing matrix " + std::string(name));
  return *m;
}

std::string SerializeContainer(const MatrixContainer& container) {
  std::string out(kMagic, 4);
  PutU32(out, static_cast<std::uint32_t>(container.size()));
  for (const auto& [name, m] : container.entries()) {
    PutU32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutU32(out, static_cast<std::uint32_t>(m.rows()));
    PutU32(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.values()) {
      PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

MatrixContainer ParseContainer(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(4) != std::string_view(kMagic, 4)) {
    throw Error(ErrorCode::kParse, "bad matrix container magic");
  }
  MatrixContainer out;
  const std::uint32_t count = in.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(in.take(in.u32()));
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    Matrix m(rows, cols);
    for (double& v : m.values()) v = std::bit_cast<float>(in.u32());
    out.add(std::move(name), std::move(m));
  }
  if (!in.done()) throw Error(ErrorCode::kParse, "trailing bytes in container");
  return out;
}

void WriteContainer(const MatrixContainer& container,
                    const std::filesystem::path& file) {
  WriteFileBytes(file, SerializeContainer(container));
}

MatrixContainer ReadContainer(const std::filesystem::path& file) {
  return ParseContainer(ReadFileBytes(file));
}

void RoundToFloat(Matrix& m) {
  for (double& v : m.values()) v = static_cast<float>(v);
}

std::string ReadFileBytes(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + file.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::filesystem::path& file, std::string_view bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + file.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + file.string());
}

}  // namespace fdt
