// core/include/fdt/error.h

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

#ifndef FDT_ERROR_H_
#define FDT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fdt {

enum class ErrorCode {
  kDuplicatePiece,
  kBlankInLexicon,
  kUnknownPiece,
  kEmptyEntry,
  kUntokenizableWord,
  kSpanOutOfRange,
  kInvalidLabel,
  kInfeasibleLabel,
  kEmptyLabel,
  kTooShortSegment,
  kDimensionMismatch,
  kInvalidGrid,
  kEmptyReference,
  kParse,
  kIo,
  kConfig,
  kDivergence,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures in the library are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fdt

#endif  // FDT_ERROR_H_
