// src/vad.cc

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

#include "sapser/vad.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sapser {
namespace {

constexpr int kNumBands = 6;
constexpr std::array<double, kNumBands + 1> kBandEdgesHz = {
    80, 250, 500, 1000, 2000, 3000, 4000};
constexpr int kInitFrames = 3;
// Indexed by aggressiveness.
constexpr std::array<double, 4> kGlobalThresholdDb = {3.0, 4.5, 6.0, 8.0};
constexpr std::array<double, 4> kLocalThresholdDb = {12.0, 15.0, 18.0, 21.0};
constexpr double kNoiseUpdateDb = 3.0;
constexpr double kMinFrameEnergy = 1e-8;  // about -80 dBFS
constexpr double kEnergyEps = 1e-10;
constexpr double kButterworthQ = 1.0 / std::numbers::sqrt2;

// Direct form I biquad, RBJ cookbook coefficients.
class Biquad {
 public:
  static Biquad LowPass(double fc, double fs) { return Make(fc, fs, false); }
  static Biquad HighPass(double fc, double fs) { return Make(fc, fs, true); }

  double Process(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  static Biquad Make(double fc, double fs, bool high) {
    const double w0 = 2.0 * std::numbers::pi * fc / fs;
    const double alpha = std::sin(w0) / (2.0 * kButterworthQ);
    const double cosw = std::cos(w0);
    const double a0 = 1.0 + alpha;
    Biquad f;
    if (high) {
      f.b0_ = (1.0 + cosw) / 2.0 / a0;
      f.b1_ = -(1.0 + cosw) / a0;
    } else {
      f.b0_ = (1.0 - cosw) / 2.0 / a0;
      f.b1_ = (1.0 - cosw) / a0;
    }
    f.b2_ = f.b0_;
    f.a1_ = -2.0 * cosw / a0;
    f.a2_ = (1.0 - alpha) / a0;
    return f;
  }

  double b0_ = 1, b1_ = 0, b2_ = 0, a1_ = 0, a2_ = 0;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

class BandChannel {
 public:
  BandChannel(double lo, double hi, double fs)
      : high_(Biquad::HighPass(lo, fs)),
        low_(Biquad::LowPass(hi, fs)),
        use_low_(hi < 0.95 * fs / 2.0) {}

  double Process(double x) {
    const double y = high_.Process(x);
    return use_low_ ? low_.Process(y) : y;
  }

 private:
  Biquad high_, low_;
  bool use_low_;
};

double ToDb(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace

void VadConfig::Validate() const {
  if (frame_ms != 10 && frame_ms != 20 && frame_ms != 30)
    Fail(ErrorCode::kInvalidArgument, "VAD frame_ms must be 10, 20 or 30");
  if (aggressiveness < 0 || aggressiveness > 3)
    Fail(ErrorCode::kInvalidArgument, "VAD aggressiveness must be in 0..3");
  if (hangover_frames < 0)
    Fail(ErrorCode::kInvalidArgument, "hangover_frames must be >= 0");
  if (!(noise_adapt_rate > 0.0 && noise_adapt_rate < 1.0))
    Fail(ErrorCode::kInvalidArgument, "noise_adapt_rate must be in (0, 1)");
}

size_t VadFrameCount(const AudioClip &clip, int frame_ms) {
  const size_t frame_len = static_cast<size_t>(frame_ms) * clip.sample_rate / 1000;
  return clip.samples.size() / frame_len;
}

VadMask DetectSpeech(const AudioClip &clip, const VadConfig &config) {
  config.Validate();
  if (!IsSupportedRate(clip.sample_rate))
    Fail(ErrorCode::kUnsupportedRate,
         "VAD supports 8000 or 16000 Hz, got " +
             std::to_string(clip.sample_rate));
  const size_t num_frames = VadFrameCount(clip, config.frame_ms);
  if (num_frames == 0)
    Fail(ErrorCode::kTooShort, "clip '" + clip.id + "' is shorter than one " +
                                   std::to_string(config.frame_ms) +
                                   " ms VAD frame");
  const size_t frame_len =
      static_cast<size_t>(config.frame_ms) * clip.sample_rate / 1000;
  const double fs = clip.sample_rate;

  std::vector<BandChannel> channels;
  for (int b = 0; b < kNumBands; ++b)
    channels.emplace_back(kBandEdgesHz[b], kBandEdgesHz[b + 1], fs);

  // energies[t][b]: mean square band output; frame_energy[t]: raw signal.
  std::vector<std::array<double, kNumBands>> energies(num_frames);
  std::vector<double> frame_energy(num_frames, 0.0);
  for (size_t t = 0; t < num_frames; ++t) {
    std::array<double, kNumBands> acc{};
    for (size_t n = 0; n < frame_len; ++n) {
      const double x = clip.samples[t * frame_len + n];
      frame_energy[t] += x * x;
      for (int b = 0; b < kNumBands; ++b) {
        const double y = channels[b].Process(x);
        acc[b] += y * y;
      }
    }
    frame_energy[t] /= static_cast<double>(frame_len);
    for (int b = 0; b < kNumBands; ++b)
      energies[t][b] = acc[b] / static_cast<double>(frame_len);
  }

  std::array<double, kNumBands> noise{};
  const size_t init = std::min<size_t>(kInitFrames, num_frames);
  for (size_t t = 0; t < init; ++t)
    for (int b = 0; b < kNumBands; ++b) noise[b] += energies[t][b] / init;

  const double global_thr = kGlobalThresholdDb[config.aggressiveness];
  const double local_thr = kLocalThresholdDb[config.aggressiveness];
  VadMask mask;
  mask.frame_ms = config.frame_ms;
  mask.utterance_id = clip.id;
  mask.decisions.assign(num_frames, 0);
  int hang = 0;
  for (size_t t = 0; t < num_frames; ++t) {
    double mean_snr = 0.0, max_snr = 0.0;
    for (int b = 0; b < kNumBands; ++b) {
      const double snr =
          ToDb((energies[t][b] + kEnergyEps) / (noise[b] + kEnergyEps));
      mean_snr += std::max(snr, 0.0) / kNumBands;
      max_snr = std::max(max_snr, snr);
    }
    const bool raw = frame_energy[t] > kMinFrameEnergy &&
                     (mean_snr > global_thr || max_snr > local_thr);
    if (raw) {
      mask.decisions[t] = 1;
      hang = config.hangover_frames;
    } else if (hang > 0) {
      mask.decisions[t] = 1;
      --hang;
    }
    // Noise tracking is independent of the mode thresholds.
    if (mean_snr < kNoiseUpdateDb) {
      for (int b = 0; b < kNumBands; ++b)
        noise[b] = (1.0 - config.noise_adapt_rate) * noise[b] +
                   config.noise_adapt_rate * energies[t][b];
    }
  }
  return mask;
}

VadMask LoadExternalMask(const std::filesystem::path &path,
                         std::optional<size_t> expected_frames, int frame_ms) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  VadMask mask;
  mask.frame_ms = frame_ms;
  mask.utterance_id = path.stem().string();
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      if (tok == "0") {
        mask.decisions.push_back(0);
      } else if (tok == "1") {
        mask.decisions.push_back(1);
      } else {
        Fail(ErrorCode::kParseError, path.string() + ":" +
                                         std::to_string(line_no) +
                                         ": bad token '" + tok + "'");
      }
    }
  }
  if (expected_frames && mask.decisions.size() != *expected_frames)
    Fail(ErrorCode::kLengthMismatch,
         path.string() + ": " + std::to_string(mask.decisions.size()) +
             " decisions, expected " + std::to_string(*expected_frames));
  return mask;
}

void WriteMask(const VadMask &mask, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << "# " << mask.utterance_id << " frame_ms=" << mask.frame_ms << "\n";
  for (size_t t = 0; t < mask.decisions.size(); ++t)
    out << (t ? " " : "") << static_cast<int>(mask.decisions[t]);
  out << "\n";
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

double SpeechRatio(const VadMask &mask) {
  if (mask.decisions.empty()) Fail(ErrorCode::kEmptyMask, mask.utterance_id);
  size_t speech = 0;
  for (uint8_t d : mask.decisions) speech += d;
  return static_cast<double>(speech) / mask.decisions.size();
}

}  // namespace sapser
