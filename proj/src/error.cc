// src/error.cc

// Copyright 2026  The sapser Authors

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

#include "sapser/error.h"

namespace sapser {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptHeader: return "CorruptHeader";
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kUnsupportedRate: return "UnsupportedRate";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kTimelineMismatch: return "TimelineMismatch";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionUnsupported: return "VersionUnsupported";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kNonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBadLabel: return "BadLabel";
    case ErrorCode::kNonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kDivergedLoss: return "DivergedLoss";
    case ErrorCode::kEmptyRow: return "EmptyRow";
    case ErrorCode::kTooFewFolds: return "TooFewFolds";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kSingleSpeaker: return "SingleSpeaker";
    case ErrorCode::kBadSpec: return "BadSpec";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string &what)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
      code_(code) {}

void Fail(ErrorCode code, const std::string &what) { throw Error(code, what); }

}  // namespace sapser
