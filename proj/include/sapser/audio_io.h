// include/sapser/audio_io.h

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

#ifndef SAPSER_AUDIO_IO_H_
#define SAPSER_AUDIO_IO_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sapser/matrix.h"

namespace sapser {

/// Mono signal with samples normalized to [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 16000;
  std::string id;

  double DurationMs() const {
    return 1000.0 * static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Analysis window and hop, both in milliseconds.
struct FrameSpec {
  int window_ms = 25;
  int stride_ms = 20;

  void Validate() const;
  size_t WindowSamples(int sample_rate) const;
  size_t StrideSamples(int sample_rate) const;
  /// Number of whole windows in a signal of num_samples samples; a
  /// trailing partial window is dropped.
  size_t FrameCount(size_t num_samples, int sample_rate) const;
};

bool IsSupportedRate(int sample_rate);

/// Reads a RIFF/WAVE PCM16 mono file. The clip id is the file stem unless
/// id_override is given.
AudioClip LoadWav(const std::filesystem::path &path,
                  std::optional<std::string> id_override = std::nullopt);

/// Writes clip as PCM16 mono, rounding to nearest and clamping to the
/// int16 range.
void WriteWav(const AudioClip &clip, const std::filesystem::path &path);

/// Keeps the first max_seconds of the clip.
AudioClip Truncate(const AudioClip &clip, double max_seconds);

/// Frame i holds samples [i*stride, i*stride + window). Throws kTooShort if
/// the clip is shorter than one window.
Matrix<float> FrameSignal(const AudioClip &clip, const FrameSpec &spec);

}  // namespace sapser

#endif  // SAPSER_AUDIO_IO_H_
