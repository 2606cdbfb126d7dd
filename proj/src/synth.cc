// src/synth.cc

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

#include "sapser/synth.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "sapser/fft.h"
#include "sapser/rng.h"

namespace sapser {
namespace {

constexpr size_t kBands = 8;
constexpr double kLowHz = 100.0, kHighHz = 4000.0;

// Envelope in dB per band; bands are log-spaced between kLowHz and kHighHz.
constexpr std::array<std::array<double, kBands>, kNumEmotions> kClassEnvelopeDb = {{
    {0, 4, 8, 10, 10, 8, 6, 4},       // angry: bright
    {4, 10, 6, 2, 6, 10, 4, 0},       // happy
    {8, 8, 6, 4, 2, 0, -2, -4},       // neutral
    {12, 8, 2, -2, -6, -8, -10, -12}, // sad: dark
}};

// Valence/arousal centres on a 1..5 scale.
constexpr std::array<std::array<double, 2>, kNumEmotions> kAffect = {{
    {2.0, 4.2}, {4.2, 3.6}, {3.0, 2.6}, {1.8, 1.8}}};
constexpr double kAffectMin = 1.0, kAffectMax = 5.0;

size_t BandOf(double hz) {
  const double pos = std::log(hz / kLowHz) / std::log(kHighHz / kLowHz);
  return std::min(kBands - 1, static_cast<size_t>(pos * kBands));
}

// Gaussian noise shaped by a band envelope, scaled to the given RMS.
std::vector<double> ShapedNoise(size_t n, int sample_rate,
                                const std::array<double, kBands> &env_db,
                                double rms, Rng *rng) {
  std::vector<double> white(n);
  for (double &v : white) v = rng->Normal();
  auto bins = RealFft(white);
  for (size_t k = 0; k < bins.size(); ++k) {
    const double hz = static_cast<double>(k) * sample_rate / n;
    if (hz < kLowHz || hz >= kHighHz)
      bins[k] = 0.0;
    else
      bins[k] *= std::pow(10.0, env_db[BandOf(hz)] / 20.0);
  }
  std::vector<double> out = InverseRealFft(bins, n);
  double ss = 0.0;
  for (double v : out) ss += v * v;
  const double cur = std::sqrt(ss / std::max<size_t>(n, 1));
  if (cur > 0)
    for (double &v : out) v *= rms / cur;
  // 5 ms raised-cosine ramps at both ends.
  const size_t ramp = std::min(n / 2, static_cast<size_t>(sample_rate / 200));
  for (size_t i = 0; i < ramp; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / ramp);
    out[i] *= g;
    out[n - 1 - i] *= g;
  }
  return out;
}

// Lengths of the alternating gap/speech segments: gap, speech, gap, ...,
// speech, gap. Gaps may be zero-length only when speech_fraction is 1.
std::vector<size_t> Layout(const SynthConfig &c, size_t n, Rng *rng) {
  const size_t segs = c.speech_segments;
  const size_t speech_total =
      std::min(n, static_cast<size_t>(std::llround(c.speech_fraction * n)));
  const size_t gap_total = n - speech_total;
  auto split = [&](size_t total, size_t parts) {
    std::vector<double> w(parts);
    for (double &x : w) x = rng->Uniform(0.7, 1.3);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<size_t> out(parts);
    size_t used = 0;
    for (size_t i = 0; i + 1 < parts; ++i) {
      out[i] = static_cast<size_t>(std::floor(total * w[i] / sum));
      used += out[i];
    }
    out[parts - 1] = total - used;
    return out;
  };
  const auto speech = split(speech_total, segs);
  const auto gaps = split(gap_total, segs + 1);
  std::vector<size_t> layout;
  for (size_t s = 0; s < segs; ++s) {
    layout.push_back(gaps[s]);
    layout.push_back(speech[s]);
  }
  layout.push_back(gaps[segs]);
  return layout;
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void SynthConfig::Validate() const {
  if (n_speakers < 3 || utterances_per_speaker < kNumEmotions)
    Fail(ErrorCode::kBadSpec,
         "need >= 3 speakers and >= 4 utterances per speaker");
  if (!IsSupportedRate(sample_rate))
    Fail(ErrorCode::kBadSpec, "sample rate must be 8000 or 16000");
  if (!(duration_s >= 0.3) || !(speech_fraction > 0 && speech_fraction <= 1) ||
      speech_segments == 0)
    Fail(ErrorCode::kBadSpec, "bad duration / speech layout");
  if (!(speech_rms > 0 && speech_rms < 0.5) || background_rms < 0 ||
      distractor_spread_db < 0 || speaker_spread_db < 0 || utterance_jitter_db < 0)
    Fail(ErrorCode::kBadSpec, "bad signal levels");
  for (double p : class_priors)
    if (!(p > 0)) Fail(ErrorCode::kBadSpec, "class priors must be positive");
  if (vad_frame_ms != 10 && vad_frame_ms != 20 && vad_frame_ms != 30)
    Fail(ErrorCode::kBadSpec, "vad_frame_ms must be 10, 20 or 30");
}

std::string SynthConfig::Serialize() const {
  std::ostringstream out;
  out << "n_speakers=" << n_speakers << "\n"
      << "utterances_per_speaker=" << utterances_per_speaker << "\n"
      << "sample_rate=" << sample_rate << "\n"
      << "duration_s=" << Num(duration_s) << "\n"
      << "speech_fraction=" << Num(speech_fraction) << "\n"
      << "speech_segments=" << speech_segments << "\n"
      << "speech_rms=" << Num(speech_rms) << "\n"
      << "distractor_db=" << Num(distractor_db) << "\n"
      << "distractor_spread_db=" << Num(distractor_spread_db) << "\n"
      << "speaker_spread_db=" << Num(speaker_spread_db) << "\n"
      << "utterance_jitter_db=" << Num(utterance_jitter_db) << "\n"
      << "background_rms=" << Num(background_rms) << "\n"
      << "class_priors=" << Num(class_priors[0]) << "," << Num(class_priors[1])
      << "," << Num(class_priors[2]) << "," << Num(class_priors[3]) << "\n"
      << "vad_frame_ms=" << vad_frame_ms << "\n";
  return out.str();
}

std::array<size_t, kNumEmotions> SpeakerLabelCounts(const SynthConfig &config) {
  const size_t n = config.utterances_per_speaker;
  const double total =
      std::accumulate(config.class_priors.begin(), config.class_priors.end(), 0.0);
  std::array<size_t, kNumEmotions> counts{};
  std::array<double, kNumEmotions> rem{};
  size_t used = 0;
  for (size_t c = 0; c < kNumEmotions; ++c) {
    const double exact = n * config.class_priors[c] / total;
    counts[c] = std::max<size_t>(1, static_cast<size_t>(std::floor(exact)));
    rem[c] = exact - std::floor(exact);
    used += counts[c];
  }
  while (used < n) {
    const size_t c = std::max_element(rem.begin(), rem.end()) - rem.begin();
    ++counts[c];
    rem[c] = -1.0;
    ++used;
  }
  while (used > n) {
    // Only reachable when the minimum-one rule overshoots; take from the
    // largest class.
    const size_t c = std::max_element(counts.begin(), counts.end()) - counts.begin();
    --counts[c];
    --used;
  }
  return counts;
}

std::vector<SynthUtterance> SynthesizeCorpus(const SynthConfig &config,
                                             uint64_t seed) {
  config.Validate();
  const auto per_speaker = SpeakerLabelCounts(config);
  const size_t n_samples =
      static_cast<size_t>(std::llround(config.duration_s * config.sample_rate));
  const size_t total = config.n_speakers * config.utterances_per_speaker;
  std::vector<SynthUtterance> corpus(total);

  // Speaker traits and label orders first, in a fixed sequence.
  std::vector<std::array<double, kBands>> speaker_env(config.n_speakers);
  std::vector<double> speaker_gain_db(config.n_speakers);
  std::vector<int> labels;
  labels.reserve(total);
  for (size_t s = 0; s < config.n_speakers; ++s) {
    Rng rng(MixSeed(seed, 1'000'000 + s));
    for (double &e : speaker_env[s]) e = config.speaker_spread_db * rng.Normal();
    speaker_gain_db[s] = 2.0 * rng.Normal();
    std::vector<int> order;
    for (size_t c = 0; c < kNumEmotions; ++c)
      order.insert(order.end(), per_speaker[c], static_cast<int>(c));
    rng.Shuffle(order);
    labels.insert(labels.end(), order.begin(), order.end());
  }

  const long count = static_cast<long>(total);
#pragma omp parallel for schedule(dynamic)
  for (long idx = 0; idx < count; ++idx) {
    const size_t u = static_cast<size_t>(idx);
    const size_t s = u / config.utterances_per_speaker;
    const size_t k = u % config.utterances_per_speaker;
    Rng rng(MixSeed(seed, u));
    const int label = labels[u];

    char id[64], spk[32], sess[32];
    std::snprintf(spk, sizeof(spk), "spk%02zu", s);
    std::snprintf(sess, sizeof(sess), "sess%02zu", s / 2);
    std::snprintf(id, sizeof(id), "%s_utt%03zu", spk, k);

    std::array<double, kBands> speech_env{};
    for (size_t b = 0; b < kBands; ++b)
      speech_env[b] = kClassEnvelopeDb[label][b] + speaker_env[s][b] +
                      config.utterance_jitter_db * rng.Normal();
    std::array<double, kBands> distractor_env{};
    for (double &e : distractor_env)
      e = rng.Uniform(-config.distractor_spread_db, config.distractor_spread_db);
    const double speech_rms =
        config.speech_rms * std::pow(10.0, speaker_gain_db[s] / 20.0);
    const double distractor_rms =
        speech_rms * std::pow(10.0, config.distractor_db / 20.0);

    std::vector<double> signal(n_samples, 0.0);
    std::vector<uint8_t> is_speech(n_samples, 0);
    const auto layout = Layout(config, n_samples, &rng);
    size_t pos = 0;
    for (size_t seg = 0; seg < layout.size(); ++seg) {
      const size_t len = layout[seg];
      if (len == 0) continue;
      const bool speech = seg % 2 == 1;
      const auto part = ShapedNoise(len, config.sample_rate,
                                    speech ? speech_env : distractor_env,
                                    speech ? speech_rms : distractor_rms, &rng);
      for (size_t i = 0; i < len; ++i) {
        signal[pos + i] = part[i];
        is_speech[pos + i] = speech ? 1 : 0;
      }
      pos += len;
    }
    if (config.background_rms > 0)
      for (double &v : signal) v += config.background_rms * rng.Normal();

    SynthUtterance &out = corpus[u];
    out.clip.id = id;
    out.clip.sample_rate = config.sample_rate;
    out.clip.samples.resize(n_samples);
    for (size_t i = 0; i < n_samples; ++i)
      out.clip.samples[i] = static_cast<float>(std::clamp(signal[i], -1.0, 1.0));
    out.speech_samples = std::move(is_speech);

    out.truth.utterance_id = id;
    out.truth.frame_ms = config.vad_frame_ms;
    const size_t frame_len =
        static_cast<size_t>(config.vad_frame_ms) * config.sample_rate / 1000;
    for (size_t t = 0; t + frame_len <= n_samples; t += frame_len) {
      size_t speech = 0;
      for (size_t i = t; i < t + frame_len; ++i) speech += out.speech_samples[i];
      out.truth.decisions.push_back(2 * speech >= frame_len ? 1 : 0);
    }

    UtteranceRecord &r = out.record;
    r.id = id;
    r.audio_path = std::filesystem::path("wav") / (std::string(id) + ".wav");
    r.speaker_id = spk;
    r.session_id = sess;
    r.label = label;
    r.valence_min = r.arousal_min = kAffectMin;
    r.valence_max = r.arousal_max = kAffectMax;
    r.valence = std::clamp(kAffect[label][0] + 0.25 * rng.Normal(), kAffectMin,
                           kAffectMax);
    r.arousal = std::clamp(kAffect[label][1] + 0.25 * rng.Normal(), kAffectMin,
                           kAffectMax);
    r.duration_s = static_cast<double>(n_samples) / config.sample_rate;
  }
  return corpus;
}

std::filesystem::path GenerateSyntheticCorpus(const SynthConfig &config,
                                              uint64_t seed,
                                              const std::filesystem::path &out_dir) {
  const auto corpus = SynthesizeCorpus(config, seed);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  std::filesystem::create_directories(out_dir / "truth", ec);
  if (ec) Fail(ErrorCode::kIoError, "cannot create " + out_dir.string());
  std::vector<UtteranceRecord> records;
  records.reserve(corpus.size());
  for (const auto &u : corpus) {
    WriteWav(u.clip, out_dir / u.record.audio_path);
    WriteMask(u.truth, out_dir / "truth" / (u.record.id + ".txt"));
    records.push_back(u.record);
  }
  const auto manifest = out_dir / "manifest.csv";
  WriteManifest(records, manifest);
  std::ofstream cfg(out_dir / "synth_config.txt");
  cfg << config.Serialize() << "seed=" << seed << "\n";
  if (!cfg) Fail(ErrorCode::kIoError, "cannot write synth_config.txt");
  return manifest;
}

}  // namespace sapser
