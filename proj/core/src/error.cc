// core/src/error.cc

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

#include "fdt/error.h"

namespace fdt {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicatePiece: return "DuplicatePiece";
    case ErrorCode::kBlankInLexicon: return "BlankInLexicon";
    case ErrorCode::kUnknownPiece: return "UnknownPiece";
    case ErrorCode::kEmptyEntry: return "EmptyEntry";
    case ErrorCode::kUntokenizableWord: return "UntokenizableWord";
    case ErrorCode::kSpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kInfeasibleLabel: return "InfeasibleLabel";
    case ErrorCode::kEmptyLabel: return "EmptyLabel";
    case ErrorCode::kTooShortSegment: return "TooShortSegment";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidGrid: return "InvalidGrid";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kDivergence: return "Divergence";
  }
  return "Unknown";
}

}  // namespace fdt
