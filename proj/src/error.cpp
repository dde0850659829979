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

#include "djpeg/error.hpp"

namespace djpeg {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kNumericError: return "NumericError";
    case ErrorCode::kUnsupportedMarker: return "UnsupportedMarker";
    case ErrorCode::kCorruptBitstream: return "CorruptBitstream";
    case ErrorCode::kMissingTable: return "MissingTable";
    case ErrorCode::kCoefficientOutOfRange: return "CoefficientOutOfRange";
    case ErrorCode::kDimensionError: return "DimensionError";
    case ErrorCode::kSameMatrixError: return "SameMatrixError";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInsufficientQPool: return "InsufficientQPool";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace djpeg
