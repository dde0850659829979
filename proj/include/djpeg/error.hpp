// Copyright 2026 The djpeg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DJPEG_ERROR_HPP_
#define DJPEG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace djpeg {

// Stable, machine-readable failure categories. The string form returned by
// error_code_name() is part of the CLI contract and must not change.
enum class ErrorCode {
  kDomainError,
  kShapeError,
  kConfigError,
  kNumericError,
  kUnsupportedMarker,
  kCorruptBitstream,
  kMissingTable,
  kCoefficientOutOfRange,
  kDimensionError,
  kSameMatrixError,
  kEmptyCorpus,
  kInsufficientQPool,
  kEmptySplit,
  kDegenerateLabels,
  kFormatError,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  std::string_view name() const { return error_code_name(code_); }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace djpeg

#endif  // DJPEG_ERROR_HPP_
