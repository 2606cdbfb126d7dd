// tests/vad_test.cc

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

#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sapser/rng.h"
#include "sapser/vad.h"
#include "test_util.h"

using namespace sapser;
using sapser::testing::CodeOf;
using sapser::testing::TempDir;
using sapser::testing::WriteBytes;

namespace {

AudioClip Silence(size_t n, int rate = 16000) {
  AudioClip c;
  c.sample_rate = rate;
  c.id = "clip";
  c.samples.assign(n, 0.0f);
  return c;
}

// Silence, then a sine burst over [start, end) samples.
AudioClip Burst(size_t n, size_t start, size_t end, double hz, double amp,
                int rate = 16000) {
  AudioClip c = Silence(n, rate);
  for (size_t i = start; i < end; ++i)
    c.samples[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * i / rate));
  return c;
}

size_t Count(const VadMask &m) {
  size_t s = 0;
  for (auto d : m.decisions) s += d;
  return s;
}

// Frames that are at least half covered by [start, end) samples.
std::vector<uint8_t> TruthFrames(size_t frames, size_t frame_len, size_t start, size_t end) {
  std::vector<uint8_t> t(frames);
  for (size_t f = 0; f < frames; ++f) {
    const size_t a = std::max(f * frame_len, start);
    const size_t b = std::min((f + 1) * frame_len, end);
    t[f] = b > a && 2 * (b - a) >= frame_len;
  }
  return t;
}

double Iou(const std::vector<uint8_t> &a, const std::vector<uint8_t> &b) {
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

}  // namespace

TEST_CASE("silence yields no speech at any aggressiveness") {
  for (int rate : {8000, 16000}) {
    for (int mode = 0; mode <= 3; ++mode) {
      VadConfig cfg;
      cfg.aggressiveness = mode;
      const VadMask m = DetectSpeech(Silence(rate, rate), cfg);
      CHECK(m.size() == 33);
      CHECK(Count(m) == 0);
    }
  }
}

TEST_CASE("a tone burst after silence is detected") {
  const AudioClip c = Burst(16000, 8000, 16000, 300.0, 1.0);
  const VadMask m = DetectSpeech(c);
  REQUIRE(m.size() == 33);
  const auto truth = TruthFrames(33, 480, 8000, 16000);
  CHECK(Iou(m.decisions, truth) >= 0.9);
}

TEST_CASE("bursts in the middle are detected for several frame lengths") {
  for (int frame_ms : {10, 20, 30}) {
    VadConfig cfg;
    cfg.frame_ms = frame_ms;
    cfg.hangover_frames = 0;
    const AudioClip c = Burst(32000, 8000, 20000, 440.0, 0.3);
    const VadMask m = DetectSpeech(c, cfg);
    const size_t len = static_cast<size_t>(frame_ms) * 16;
    CHECK(m.size() == 32000 / len);
    CHECK(Iou(m.decisions, TruthFrames(m.size(), len, 8000, 20000)) >= 0.9);
  }
}

TEST_CASE("hangover extends speech after a burst") {
  VadConfig cfg;
  cfg.hangover_frames = 0;
  const AudioClip c = Burst(32000, 8000, 16000, 440.0, 0.5);
  const size_t plain = Count(DetectSpeech(c, cfg));
  cfg.hangover_frames = 4;
  const VadMask held = DetectSpeech(c, cfg);
  CHECK(Count(held) == plain + 4);
}

TEST_CASE("aggressiveness is monotone on random clips") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 4800 + rng.Index(16000);
    AudioClip c = Silence(n);
    const double noise = rng.Uniform(0.0, 0.01);
    for (float &s : c.samples) s = static_cast<float>(noise * rng.Normal());
    const size_t a = rng.Index(n), b = a + rng.Index(n - a);
    const double amp = std::pow(10.0, rng.Uniform(-3.0, 0.0));
    const double hz = rng.Uniform(100.0, 3500.0);
    for (size_t i = a; i < b; ++i)
      c.samples[i] += static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * i / 16000));
    size_t prev = SIZE_MAX;
    for (int mode = 0; mode <= 3; ++mode) {
      VadConfig cfg;
      cfg.aggressiveness = mode;
      const VadMask m = DetectSpeech(c, cfg);
      const size_t count = Count(m);
      REQUIRE(count <= prev);
      prev = count;
    }
  }
}

TEST_CASE("scaling a burst up never removes detected frames") {
  VadConfig cfg;
  cfg.hangover_frames = 0;
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const double amp = std::pow(10.0, rng.Uniform(-3.5, -1.0));
    const double hz = rng.Uniform(150.0, 3000.0);
    const AudioClip base = Burst(24000, 4800, 19200, hz, amp);
    const VadMask m1 = DetectSpeech(base, cfg);
    const AudioClip louder = Burst(24000, 4800, 19200, hz, amp * rng.Uniform(1.0, 4.0));
    const VadMask m2 = DetectSpeech(louder, cfg);
    for (size_t i = 0; i < m1.size(); ++i)
      if (m1.decisions[i]) REQUIRE(m2.decisions[i] == 1);
  }
}

TEST_CASE("detection is deterministic") {
  Rng rng(9);
  AudioClip c = Silence(16000);
  for (float &s : c.samples) s = static_cast<float>(0.1 * rng.Normal());
  CHECK(DetectSpeech(c).decisions == DetectSpeech(c).decisions);
}

TEST_CASE("detector preconditions") {
  CHECK(CodeOf([] { DetectSpeech(Silence(44100, 44100)); }) == ErrorCode::kUnsupportedRate);
  CHECK(CodeOf([] { DetectSpeech(Silence(100)); }) == ErrorCode::kTooShort);
  VadConfig bad;
  bad.frame_ms = 25;
  CHECK(CodeOf([&] { DetectSpeech(Silence(16000), bad); }) == ErrorCode::kInvalidArgument);
  bad = VadConfig{};
  bad.aggressiveness = 4;
  CHECK(CodeOf([&] { bad.Validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("mask length counts whole frames only") {
  CHECK(DetectSpeech(Silence(16000 + 479)).size() == 34);
  CHECK(VadFrameCount(Silence(16000 + 479), 30) == 34);
  CHECK(VadFrameCount(Silence(8000, 8000), 10) == 100);
}

TEST_CASE("external masks parse in order") {
  TempDir dir("mask");
  WriteBytes(dir / "a.txt", "0 0 1 1 0\n");
  const VadMask m = LoadExternalMask(dir / "a.txt", 5);
  CHECK(m.decisions == std::vector<uint8_t>{0, 0, 1, 1, 0});
  CHECK(m.utterance_id == "a");

  WriteBytes(dir / "b.txt", "# comment line\n1 1\n0\n\t1\n");
  CHECK(LoadExternalMask(dir / "b.txt", std::nullopt).decisions ==
        std::vector<uint8_t>{1, 1, 0, 1});

  WriteBytes(dir / "short.txt", "0 0 1 1\n");
  CHECK(CodeOf([&] { LoadExternalMask(dir / "short.txt", 5); }) ==
        ErrorCode::kLengthMismatch);
  WriteBytes(dir / "two.txt", "0 2 1 1 0\n");
  CHECK(CodeOf([&] { LoadExternalMask(dir / "two.txt", 5); }) == ErrorCode::kParseError);
  WriteBytes(dir / "word.txt", "0 yes 1\n");
  CHECK(CodeOf([&] { LoadExternalMask(dir / "word.txt", std::nullopt); }) ==
        ErrorCode::kParseError);
  CHECK(CodeOf([&] { LoadExternalMask(dir / "none.txt", 5); }) == ErrorCode::kIoError);
}

TEST_CASE("written masks read back unchanged") {
  TempDir dir("mask");
  VadMask m;
  m.utterance_id = "u1";
  m.frame_ms = 20;
  m.decisions = {1, 0, 0, 1, 1, 1, 0};
  WriteMask(m, dir / "u1.txt");
  const VadMask back = LoadExternalMask(dir / "u1.txt", 7, 20);
  CHECK(back.decisions == m.decisions);
  CHECK(back.frame_ms == 20);
}

TEST_CASE("speech ratio") {
  auto mask = [](std::vector<uint8_t> d) {
    VadMask m;
    m.decisions = std::move(d);
    return m;
  };
  CHECK(SpeechRatio(mask({1, 1, 1, 1})) == 1.0);
  CHECK(SpeechRatio(mask({0, 0, 0, 0})) == 0.0);
  CHECK(SpeechRatio(mask({1, 0, 1, 0})) == 0.5);
  CHECK(CodeOf([&] { SpeechRatio(mask({})); }) == ErrorCode::kEmptyMask);
}
