// include/sapser/manifest.h

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

#ifndef SAPSER_MANIFEST_H_
#define SAPSER_MANIFEST_H_

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sapser {

inline constexpr size_t kNumEmotions = 4;
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "angry", "happy", "neutral", "sad"};

std::vector<std::string> EmotionNames();

/// Class index for a label; "excited" folds into happy. Throws
/// kUnknownLabel otherwise.
int ParseEmotion(std::string_view label);

struct UtteranceRecord {
  std::string id;
  std::filesystem::path audio_path;    // absolute or manifest-relative
  std::filesystem::path feature_path;  // empty: extract from audio
  std::string speaker_id;
  std::string session_id;
  int label = 0;
  double valence = 0, arousal = 0;
  double valence_min = 0, valence_max = 1;
  double arousal_min = 0, arousal_max = 1;
  double duration_s = 0;

  /// Targets mapped linearly onto [0, 1] from their declared ranges.
  double ScaledValence() const;
  double ScaledArousal() const;
};

/// CSV with header
///   id,audio_path,feature_path,speaker_id,session_id,label,valence,arousal,
///   valence_min,valence_max,arousal_min,arousal_max,duration_s
/// Columns may appear in any order; feature_path may be absent or empty.
/// Relative paths are resolved against the manifest's directory.
std::vector<UtteranceRecord> LoadManifest(const std::filesystem::path &path);

/// Writes paths as given (relative paths stay relative).
void WriteManifest(std::span<const UtteranceRecord> records,
                   const std::filesystem::path &path);

}  // namespace sapser

#endif  // SAPSER_MANIFEST_H_
