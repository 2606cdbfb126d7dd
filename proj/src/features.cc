// src/features.cc

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

#include "sapser/features.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "sapser/fft.h"

namespace sapser {
namespace {

double HzToMel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

size_t NextPow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// n_mels x (fft_size/2 + 1) triangular weights.
Matrix<double> MelBanks(const MelConfig &cfg, int sample_rate, size_t fft_size) {
  const size_t bins = fft_size / 2 + 1;
  const double fmax = cfg.fmax > 0 ? cfg.fmax : sample_rate / 2.0;
  const double mel_lo = HzToMel(cfg.fmin), mel_hi = HzToMel(fmax);
  const double mel_step = (mel_hi - mel_lo) / (cfg.n_mels + 1);
  Matrix<double> banks(cfg.n_mels, bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = mel_lo + m * mel_step;
    const double center = left + mel_step;
    const double right = center + mel_step;
    for (size_t k = 0; k < bins; ++k) {
      const double mel =
          HzToMel(static_cast<double>(k) * sample_rate / fft_size);
      double w = 0.0;
      if (mel > left && mel <= center)
        w = (mel - left) / (center - left);
      else if (mel > center && mel < right)
        w = (right - mel) / (right - center);
      banks(m, k) = w;
    }
  }
  return banks;
}

void PutU32(std::string *out, uint32_t v) {
  for (int k = 0; k < 4; ++k)
    out->push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
void PutU16(std::string *out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>(v >> 8));
}
uint32_t GetU32(const unsigned char *p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t GetU16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

constexpr size_t kSapfHeaderBytes = 24;

}  // namespace

void FeatureMatrix::Validate() const {
  if (values.rows() == 0 || values.cols() == 0)
    Fail(ErrorCode::kEmptyMatrix, "feature matrix '" + utterance_id + "'");
  for (float v : values.flat())
    if (!std::isfinite(v))
      Fail(ErrorCode::kNonFiniteEntry, "feature matrix '" + utterance_id + "'");
}

void MelConfig::Validate(int sample_rate) const {
  const double top = fmax > 0 ? fmax : sample_rate / 2.0;
  if (n_mels < 1 || !(fmin >= 0 && fmin < top) || top > sample_rate / 2.0 ||
      !(log_floor > 0) || fft_size < 0)
    Fail(ErrorCode::kInvalidArgument, "invalid mel configuration");
}

FeatureMatrix ExtractLogMel(const AudioClip &clip, const FrameSpec &spec,
                            const MelConfig &cfg) {
  cfg.Validate(clip.sample_rate);
  const Matrix<float> frames = FrameSignal(clip, spec);
  const size_t window = frames.cols();
  const size_t fft_size =
      cfg.fft_size > 0 ? static_cast<size_t>(cfg.fft_size) : NextPow2(window);
  if (fft_size < window)
    Fail(ErrorCode::kInvalidArgument, "fft_size shorter than the window");
  const Matrix<double> banks = MelBanks(cfg, clip.sample_rate, fft_size);

  std::vector<double> hamming(window);
  for (size_t n = 0; n < window; ++n)
    hamming[n] = window > 1 ? 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi *
                                                     n / (window - 1))
                            : 1.0;

  FeatureMatrix out;
  out.window_ms = spec.window_ms;
  out.stride_ms = spec.stride_ms;
  out.utterance_id = clip.id;
  out.values = Matrix<float>(frames.rows(), cfg.n_mels);
  std::vector<double> buf(fft_size, 0.0);
  std::vector<double> power(fft_size / 2 + 1);
  for (size_t t = 0; t < frames.rows(); ++t) {
    for (size_t n = 0; n < window; ++n) buf[n] = frames(t, n) * hamming[n];
    const auto spectrum = RealFft(buf);
    for (size_t k = 0; k < power.size(); ++k) power[k] = std::norm(spectrum[k]);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      for (size_t k = 0; k < power.size(); ++k) e += banks(m, k) * power[k];
      out.values(t, m) = static_cast<float>(std::log(e + cfg.log_floor));
    }
  }
  return out;
}

std::vector<FeatureMatrix> ExtractLogMelBatch(std::span<const AudioClip> clips,
                                              const FrameSpec &spec,
                                              const MelConfig &cfg) {
  std::vector<FeatureMatrix> out(clips.size());
  const long n = static_cast<long>(clips.size());
  // Exceptions must not escape the parallel region.
  std::vector<std::exception_ptr> errors(clips.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = ExtractLogMel(clips[i], spec, cfg);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace serial {
std::vector<FeatureMatrix> ExtractLogMelBatch(std::span<const AudioClip> clips,
                                              const FrameSpec &spec,
                                              const MelConfig &cfg) {
  std::vector<FeatureMatrix> out;
  out.reserve(clips.size());
  for (const AudioClip &clip : clips) out.push_back(ExtractLogMel(clip, spec, cfg));
  return out;
}
}  // namespace serial

void SaveFeatures(const FeatureMatrix &m, const std::filesystem::path &path) {
  m.Validate();
  std::string out;
  out.reserve(kSapfHeaderBytes + 4 * m.values.size());
  out += "SAPF";
  PutU32(&out, kSapfVersion);
  PutU32(&out, static_cast<uint32_t>(m.values.rows()));
  PutU32(&out, static_cast<uint32_t>(m.values.cols()));
  PutU16(&out, static_cast<uint16_t>(m.window_ms));
  PutU16(&out, static_cast<uint16_t>(m.stride_ms));
  PutU32(&out, 0);
  for (float v : m.values.flat()) PutU32(&out, std::bit_cast<uint32_t>(v));
  std::ofstream file(path, std::ios::binary);
  if (!file) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) Fail(ErrorCode::kIoError, "write failed for " + path.string());
}

FeatureMatrix LoadFeatures(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  if (bytes.size() < 4 || std::memcmp(p, "SAPF", 4) != 0)
    Fail(ErrorCode::kBadMagic, path.string());
  if (bytes.size() < kSapfHeaderBytes)
    Fail(ErrorCode::kTruncatedPayload, path.string() + ": short header");
  const uint32_t version = GetU32(p + 4);
  if (version != kSapfVersion)
    Fail(ErrorCode::kVersionUnsupported,
         path.string() + ": version " + std::to_string(version));
  const uint64_t rows = GetU32(p + 8), cols = GetU32(p + 12);
  FeatureMatrix m;
  m.window_ms = GetU16(p + 16);
  m.stride_ms = GetU16(p + 18);
  m.utterance_id = path.stem().string();
  if (bytes.size() - kSapfHeaderBytes < rows * cols * 4)
    Fail(ErrorCode::kTruncatedPayload,
         path.string() + ": header declares " + std::to_string(rows) + "x" +
             std::to_string(cols));
  m.values = Matrix<float>(rows, cols);
  const unsigned char *payload = p + kSapfHeaderBytes;
  for (size_t k = 0; k < rows * cols; ++k)
    m.values.data()[k] = std::bit_cast<float>(GetU32(payload + 4 * k));
  m.Validate();
  return m;
}

}  // namespace sapser
