// include/sapser/synth.h

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

#ifndef SAPSER_SYNTH_H_
#define SAPSER_SYNTH_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sapser/audio_io.h"
#include "sapser/manifest.h"
#include "sapser/vad.h"

namespace sapser {

/// Synthetic emotion corpus.
///
/// Each utterance alternates non-speech gaps and speech segments,
/// starting and ending with a gap. Speech segments are Gaussian noise
/// shaped by an eight-band spectral envelope (100 Hz - 4 kHz) that depends
/// on the emotion class, plus a per-speaker perturbation and a small
/// per-utterance jitter. Gaps carry noise whose envelope is drawn anew for
/// every utterance, independent of the class, at distractor_db relative to
/// the speech level. Class information therefore lives only in the speech
/// segments. A white background noise spans the whole clip.
struct SynthConfig {
  size_t n_speakers = 8;
  size_t utterances_per_speaker = 20;
  int sample_rate = 16000;
  double duration_s = 1.5;
  double speech_fraction = 0.3;     // in (0, 1]
  size_t speech_segments = 2;
  double speech_rms = 0.1;
  double distractor_db = -6.0;      // gap level relative to speech
  double distractor_spread_db = 15.0;  // envelope drawn in +/- spread
  double speaker_spread_db = 2.0;   // per-speaker envelope std dev
  double utterance_jitter_db = 1.0;
  double background_rms = 0.001;    // 0 disables background noise
  /// Relative class frequencies (angry, happy, neutral, sad).
  std::array<double, kNumEmotions> class_priors = {1530, 1313, 4328, 773};
  int vad_frame_ms = 30;

  void Validate() const;
  std::string Serialize() const;
};

struct SynthUtterance {
  UtteranceRecord record;
  AudioClip clip;
  VadMask truth;            // vad_frame_ms grid
  std::vector<uint8_t> speech_samples;  // per-sample ground truth
};

/// In-memory generation; the same config and seed always give the same
/// corpus.
std::vector<SynthUtterance> SynthesizeCorpus(const SynthConfig &config,
                                             uint64_t seed);

/// Writes manifest.csv, wav/<id>.wav, truth/<id>.txt and synth_config.txt
/// under out_dir and returns the manifest path.
std::filesystem::path GenerateSyntheticCorpus(const SynthConfig &config,
                                              uint64_t seed,
                                              const std::filesystem::path &out_dir);

/// Per-speaker label counts: largest-remainder split of the priors with
/// every class present at least once.
std::array<size_t, kNumEmotions> SpeakerLabelCounts(const SynthConfig &config);

}  // namespace sapser

#endif  // SAPSER_SYNTH_H_
