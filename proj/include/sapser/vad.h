// include/sapser/vad.h

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

#ifndef SAPSER_VAD_H_
#define SAPSER_VAD_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sapser/audio_io.h"

namespace sapser {

struct VadConfig {
  int frame_ms = 30;        // 10, 20 or 30
  int aggressiveness = 2;   // 0 (permissive) .. 3 (strict)
  int hangover_frames = 4;
  double noise_adapt_rate = 0.05;

  void Validate() const;
};

struct VadMask {
  std::vector<uint8_t> decisions;
  int frame_ms = 30;
  std::string utterance_id;

  size_t size() const { return decisions.size(); }
};

/// Sub-band energy detector.
///
/// The clip is split into non-overlapping frame_ms frames. Six band-pass
/// channels (80-250, 250-500, 500-1k, 1k-2k, 2k-3k, 3k-4k Hz; each a
/// second-order high-pass cascaded with a second-order low-pass) run over
/// the whole clip, and each frame yields one energy per band. A per-band
/// noise floor is initialized from the mean energy of the first three
/// frames, which are assumed to be non-speech, and afterwards follows
/// frames whose mean band SNR stays below a fixed update threshold.
/// A frame is speech when its energy clears an absolute gate and either
/// the mean clamped band SNR exceeds the global threshold of the mode or
/// any band exceeds the local threshold. Thresholds rise with
/// aggressiveness while the noise tracking does not depend on it, so a
/// stricter mode can only remove speech frames. After a speech frame,
/// up to hangover_frames following frames are also marked speech.
VadMask DetectSpeech(const AudioClip &clip, const VadConfig &config = {});

/// Parses the mask text format: whitespace-separated 0/1 tokens, lines
/// starting with '#' are comments. When expected_frames is given the
/// token count must match it.
VadMask LoadExternalMask(const std::filesystem::path &path,
                         std::optional<size_t> expected_frames,
                         int frame_ms = 30);

/// Writes the mask as one line of tokens preceded by a comment header.
void WriteMask(const VadMask &mask, const std::filesystem::path &path);

double SpeechRatio(const VadMask &mask);

/// Number of whole VAD frames in the clip.
size_t VadFrameCount(const AudioClip &clip, int frame_ms);

}  // namespace sapser

#endif  // SAPSER_VAD_H_
