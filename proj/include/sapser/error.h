// include/sapser/error.h

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

#ifndef SAPSER_ERROR_H_
#define SAPSER_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace sapser {

enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  // audio
  kUnsupportedFormat,
  kCorruptHeader,
  kEmptyAudio,
  kTooShort,
  kUnsupportedRate,
  // masks
  kLengthMismatch,
  kParseError,
  kEmptyMask,
  kTimelineMismatch,
  // feature files and checkpoints
  kBadMagic,
  kVersionUnsupported,
  kTruncatedPayload,
  kNonFiniteEntry,
  // numerics
  kEmptyMatrix,
  kShapeMismatch,
  kBadLabel,
  kNonPositiveWeight,
  kEmptyClass,
  kNonFiniteGradient,
  kDivergedLoss,
  // metrics
  kEmptyRow,
  kTooFewFolds,
  // harness
  kUnknownLabel,
  kMissingColumn,
  kSingleSpeaker,
  kBadSpec,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string &what);

}  // namespace sapser

#endif  // SAPSER_ERROR_H_
