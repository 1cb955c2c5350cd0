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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slt {

enum class ErrorCode {
  kInvalidDimensions,
  kCorruptFrame,
  kSubRateClip,
  kParse,
  kSchema,
  kIo,
  kConfig,
  kLexiconMiss,
  kGeneration,
  kShape,
  kEmptyInput,
  kInvalidId,
  kUndefinedMean,
  kNonFinite,
  kInput,
};

std::string_view error_code_name(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
// The code decides the CLI exit status (see cli_exit_code in pipeline.h).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace slt
