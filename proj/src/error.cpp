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

#include "dewarp/error.hpp"

namespace dewarp {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedWav: return "MalformedWav";
    case ErrorKind::kUnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorKind::kAudioTooShort: return "AudioTooShort";
    case ErrorKind::kTooShort: return "TooShort";
    case ErrorKind::kUnknownUtterance: return "UnknownUtterance";
    case ErrorKind::kMalformedBoundaryLine: return "MalformedBoundaryLine";
    case ErrorKind::kNonMonotonicBoundaries: return "NonMonotonicBoundaries";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kVersionUnsupported: return "VersionUnsupported";
    case ErrorKind::kTruncatedTensor: return "TruncatedTensor";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kMalformedLine: return "MalformedLine";
    case ErrorKind::kInsufficientData: return "InsufficientData";
    case ErrorKind::kEmptyOutput: return "EmptyOutput";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

}  // namespace dewarp
