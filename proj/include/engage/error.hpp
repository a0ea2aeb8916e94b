// Copyright (c) 2026 The Engage Authors. All Rights Reserved.
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

namespace engage {

enum class ErrorCode {
  MalformedInput,
  UnknownSpeaker,
  EmptyTranscript,
  BackendUnavailable,
  DimensionMismatch,
  EmptySentence,
  EmptyList,
  ZeroVector,
  TooFewSentences,
  UnlabeledRow,
  DuplicateSessionId,
  AllMissingFeature,
  TooFewRows,
  ClassTooSmall,
  ClassOfSizeOne,
  DegenerateSample,
  DegenerateLabels,
  NonConvergence,
  SingleClassTruth,
  ClassSmallerThanK,
  InvalidArgument,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::UnknownSpeaker: return "UnknownSpeaker";
    case ErrorCode::EmptyTranscript: return "EmptyTranscript";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySentence: return "EmptySentence";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::TooFewSentences: return "TooFewSentences";
    case ErrorCode::UnlabeledRow: return "UnlabeledRow";
    case ErrorCode::DuplicateSessionId: return "DuplicateSessionId";
    case ErrorCode::AllMissingFeature: return "AllMissingFeature";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::ClassOfSizeOne: return "ClassOfSizeOne";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SingleClassTruth: return "SingleClassTruth";
    case ErrorCode::ClassSmallerThanK: return "ClassSmallerThanK";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// All library failures surface as this exception; `code()` identifies the
// failure class, `what()` carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace engage
