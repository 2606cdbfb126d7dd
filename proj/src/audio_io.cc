// src/audio_io.cc

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

#include "sapser/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sapser {
namespace {

uint32_t ReadU32(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string *out, uint32_t v) {
  for (int k = 0; k < 4; ++k) out->push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void PutU16(std::string *out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>(v >> 8));
}

}  // namespace

bool IsSupportedRate(int sample_rate) {
  return sample_rate == 8000 || sample_rate == 16000;
}

void FrameSpec::Validate() const {
  if (window_ms <= 0 || stride_ms <= 0 || stride_ms > window_ms)
    Fail(ErrorCode::kInvalidArgument,
         "frame spec needs 0 < stride_ms <= window_ms");
}

size_t FrameSpec::WindowSamples(int sample_rate) const {
  return static_cast<size_t>(window_ms) * sample_rate / 1000;
}

size_t FrameSpec::StrideSamples(int sample_rate) const {
  return static_cast<size_t>(stride_ms) * sample_rate / 1000;
}

size_t FrameSpec::FrameCount(size_t num_samples, int sample_rate) const {
  const size_t window = WindowSamples(sample_rate);
  if (num_samples < window) return 0;
  return (num_samples - window) / StrideSamples(sample_rate) + 1;
}

AudioClip LoadWav(const std::filesystem::path &path,
                  std::optional<std::string> id_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto *data = reinterpret_cast<const unsigned char *>(bytes.data());
  const size_t size = bytes.size();

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0)
    Fail(ErrorCode::kCorruptHeader, path.string() + ": not a RIFF/WAVE file");
  if (static_cast<size_t>(ReadU32(data + 4)) + 8 > size)
    Fail(ErrorCode::kCorruptHeader,
         path.string() + ": RIFF length exceeds file size");

  bool have_fmt = false;
  int sample_rate = 0;
  const unsigned char *pcm = nullptr;
  size_t pcm_bytes = 0;
  size_t pos = 12;
  while (pos + 8 <= size) {
    const uint32_t chunk_size = ReadU32(data + pos + 4);
    const unsigned char *body = data + pos + 8;
    if (pos + 8 + static_cast<size_t>(chunk_size) > size)
      Fail(ErrorCode::kCorruptHeader,
           path.string() + ": chunk length exceeds file size");
    if (std::memcmp(data + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16)
        Fail(ErrorCode::kCorruptHeader, path.string() + ": short fmt chunk");
      const uint16_t format = ReadU16(body);
      const uint16_t channels = ReadU16(body + 2);
      sample_rate = static_cast<int>(ReadU32(body + 4));
      const uint16_t bits = ReadU16(body + 14);
      if (format != 1 || bits != 16 || channels != 1)
        Fail(ErrorCode::kUnsupportedFormat,
             path.string() + ": need PCM16 mono (format=" +
                 std::to_string(format) + " channels=" +
                 std::to_string(channels) + " bits=" + std::to_string(bits) +
                 ")");
      if (!IsSupportedRate(sample_rate))
        Fail(ErrorCode::kUnsupportedFormat,
             path.string() + ": sample rate " + std::to_string(sample_rate) +
                 " (resampling is not supported)");
      have_fmt = true;
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      if (chunk_size % 2 != 0)
        Fail(ErrorCode::kCorruptHeader, path.string() + ": odd data length");
      pcm = body;
      pcm_bytes = chunk_size;
      break;
    }
    pos += 8 + chunk_size + (chunk_size & 1);
  }
  if (!have_fmt || pcm == nullptr)
    Fail(ErrorCode::kCorruptHeader, path.string() + ": missing fmt or data");
  if (pcm_bytes == 0) Fail(ErrorCode::kEmptyAudio, path.string());

  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.id = id_override ? *id_override : path.stem().string();
  clip.samples.resize(pcm_bytes / 2);
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    const auto v = static_cast<int16_t>(ReadU16(pcm + 2 * i));
    clip.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return clip;
}

void WriteWav(const AudioClip &clip, const std::filesystem::path &path) {
  const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(&out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, 1);
  PutU16(&out, 1);
  PutU32(&out, static_cast<uint32_t>(clip.sample_rate));
  PutU32(&out, static_cast<uint32_t>(clip.sample_rate) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  out += "data";
  PutU32(&out, data_bytes);
  for (float s : clip.samples) {
    const double scaled = std::nearbyint(static_cast<double>(s) * 32768.0);
    const auto v = static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    PutU16(&out, static_cast<uint16_t>(v));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

AudioClip Truncate(const AudioClip &clip, double max_seconds) {
  if (!(max_seconds > 0))
    Fail(ErrorCode::kInvalidArgument, "max_seconds must be positive");
  const auto limit =
      static_cast<size_t>(std::floor(max_seconds * clip.sample_rate));
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.id = clip.id;
  const size_t keep = std::min(limit, clip.samples.size());
  out.samples.assign(clip.samples.begin(), clip.samples.begin() + keep);
  return out;
}

Matrix<float> FrameSignal(const AudioClip &clip, const FrameSpec &spec) {
  spec.Validate();
  const size_t window = spec.WindowSamples(clip.sample_rate);
  const size_t stride = spec.StrideSamples(clip.sample_rate);
  const size_t frames = spec.FrameCount(clip.samples.size(), clip.sample_rate);
  if (frames == 0)
    Fail(ErrorCode::kTooShort, "clip '" + clip.id + "' is shorter than one " +
                                   std::to_string(spec.window_ms) +
                                   " ms window");
  Matrix<float> out(frames, window);
  for (size_t i = 0; i < frames; ++i)
    std::copy_n(clip.samples.begin() + i * stride, window, out.row(i).begin());
  return out;
}

}  // namespace sapser
