// Copyright 2026 The Movelet Authors. All Rights Reserved.
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

#ifndef MOVELET_ERROR_HPP_
#define MOVELET_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace movelet {

enum class ErrorCode {
  kInvalidArgument,
  kEmptySegment,
  kOutOfBounds,
  kDegenerateCalibration,
  kInvalidRotation,
  kInsufficientSamples,
  kSingularCovariance,
  kLengthMismatch,
  kWindowTooLong,
  kEmptyDictionary,
  kSeriesTooShort,
  kFsMismatch,
  kUnmappedLabel,
  kInsufficientSubjects,
  kInvalidConfig,
  kParseError,
  kNonUniformIndex,
  kUnknownLabel,
  kIoError,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptySegment: return "EmptySegment";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kDegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::kInvalidRotation: return "InvalidRotation";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kWindowTooLong: return "WindowTooLong";
    case ErrorCode::kEmptyDictionary: return "EmptyDictionary";
    case ErrorCode::kSeriesTooShort: return "SeriesTooShort";
    case ErrorCode::kFsMismatch: return "FsMismatch";
    case ErrorCode::kUnmappedLabel: return "UnmappedLabel";
    case ErrorCode::kInsufficientSubjects: return "InsufficientSubjects";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kNonUniformIndex: return "NonUniformIndex";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported through this exception. `line` is set
// by the file readers and points at the 1-based offending line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace movelet

#endif  // MOVELET_ERROR_HPP_
