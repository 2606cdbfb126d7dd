// include/sapser/features.h

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

#ifndef SAPSER_FEATURES_H_
#define SAPSER_FEATURES_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sapser/audio_io.h"
#include "sapser/matrix.h"

namespace sapser {

/// T x d frame-level features; row i describes the window starting at
/// i * stride_ms.
struct FeatureMatrix {
  Matrix<float> values;
  int window_ms = 25;
  int stride_ms = 20;
  std::string utterance_id;

  size_t num_frames() const { return values.rows(); }
  size_t dim() const { return values.cols(); }
  /// Throws unless T >= 1, d >= 1 and every entry is finite.
  void Validate() const;
};

struct MelConfig {
  int n_mels = 40;
  int fft_size = 0;        // 0: next power of two >= window length
  double fmin = 20.0;
  double fmax = 0.0;       // 0: sample_rate / 2
  double log_floor = 1e-10;

  void Validate(int sample_rate) const;
};

/// Row i = log(mel filterbank energies of Hamming-windowed frame i +
/// log_floor), using HTK mel triangles over the power spectrum.
FeatureMatrix ExtractLogMel(const AudioClip &clip, const FrameSpec &spec,
                            const MelConfig &cfg = {});

/// Extracts every clip; the OpenMP version fans out over clips.
std::vector<FeatureMatrix> ExtractLogMelBatch(std::span<const AudioClip> clips,
                                              const FrameSpec &spec,
                                              const MelConfig &cfg = {});
namespace serial {
std::vector<FeatureMatrix> ExtractLogMelBatch(std::span<const AudioClip> clips,
                                              const FrameSpec &spec,
                                              const MelConfig &cfg = {});
}  // namespace serial

// SAPF layout, little-endian:
//   "SAPF" | u32 version=1 | u32 rows | u32 cols | u16 window_ms |
//   u16 stride_ms | u32 reserved=0 | rows*cols float32, row-major.
inline constexpr uint32_t kSapfVersion = 1;

void SaveFeatures(const FeatureMatrix &m, const std::filesystem::path &path);
FeatureMatrix LoadFeatures(const std::filesystem::path &path);

}  // namespace sapser

#endif  // SAPSER_FEATURES_H_
