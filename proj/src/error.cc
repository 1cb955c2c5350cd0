// Copyright 2026 The compact-slt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slt/error.h"

namespace slt {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDimensions: return "invalid-dimensions";
    case ErrorCode::kCorruptFrame: return "corrupt-frame";
    case ErrorCode::kSubRateClip: return "sub-rate-clip";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kLexiconMiss: return "lexicon-miss";
    case ErrorCode::kGeneration: return "generation";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kInvalidId: return "invalid-id";
    case ErrorCode::kUndefinedMean: return "undefined-mean";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kInput: return "input";
  }
  return "unknown";
}

}  // namespace slt
