// Copyright (c) 2026 The dewarp Authors. All Rights Reserved.
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

namespace dewarp {

enum class ErrorKind {
  kMalformedWav,
  kUnsupportedEncoding,
  kAudioTooShort,
  kTooShort,
  kUnknownUtterance,
  kMalformedBoundaryLine,
  kNonMonotonicBoundaries,
  kLengthMismatch,
  kBadMagic,
  kVersionUnsupported,
  kTruncatedTensor,
  kDuplicateId,
  kMalformedLine,
  kInsufficientData,
  kEmptyOutput,
  kDimensionMismatch,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

// Data errors: anything caused by the content of input files or by inputs
// that fail a documented domain check. Programming errors (violated
// preconditions on arguments) are reported as std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dewarp
