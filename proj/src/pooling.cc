// src/pooling.cc

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

#include "sapser/pooling.h"

#include <algorithm>
#include <string>

#include "sapser/kernels.h"

namespace sapser {
namespace {

void CheckKeep(size_t rows, const AlignedMask &keep) {
  if (keep.size() != rows)
    Fail(ErrorCode::kShapeMismatch, "mask has " + std::to_string(keep.size()) +
                                        " bits for " + std::to_string(rows) +
                                        " frames");
}

int64_t Overlap(int64_t a0, int64_t a1, int64_t b0, int64_t b1) {
  return std::max<int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

size_t AlignedMask::count() const {
  size_t n = 0;
  for (uint8_t k : keep) n += k;
  return n;
}

template <typename Real>
std::vector<Real> Gap(const Matrix<Real> &features) {
  if (features.rows() == 0) Fail(ErrorCode::kEmptyMatrix, "GAP over no frames");
  return kernels::ColumnMean(features);
}

std::vector<float> Gap(const FeatureMatrix &features) {
  return Gap(features.values);
}

AlignedMask AlignMask(const VadMask &mask, size_t num_frames, int window_ms,
                      int stride_ms) {
  const int64_t f = mask.frame_ms;
  const int64_t n = static_cast<int64_t>(mask.size());
  if (f <= 0 || n == 0) Fail(ErrorCode::kEmptyMask, mask.utterance_id);
  AlignedMask out;
  out.keep.assign(num_frames, 0);
  if (num_frames == 0) return out;
  const int64_t covered = n * f;
  const int64_t feature_end =
      static_cast<int64_t>(num_frames - 1) * stride_ms + window_ms;
  if (feature_end > covered + f)
    Fail(ErrorCode::kTimelineMismatch,
         mask.utterance_id + ": features span " + std::to_string(feature_end) +
             " ms, VAD mask covers " + std::to_string(covered) + " ms");
  for (size_t i = 0; i < num_frames; ++i) {
    const int64_t s = static_cast<int64_t>(i) * stride_ms;
    const int64_t e = s + window_ms;
    const int64_t overlapped = Overlap(s, e, 0, covered);
    if (overlapped == 0) {
      out.keep[i] = mask.decisions.back();
      continue;
    }
    int64_t speech = 0;
    for (int64_t j = std::max<int64_t>(0, s / f); j < n && j * f < e; ++j)
      if (mask.decisions[j]) speech += Overlap(s, e, j * f, (j + 1) * f);
    out.keep[i] = 2 * speech >= overlapped ? 1 : 0;
  }
  return out;
}

AlignedMask AlignMask(const VadMask &mask, const FeatureMatrix &features) {
  return AlignMask(mask, features.num_frames(), features.window_ms,
                   features.stride_ms);
}

template <typename Real>
Matrix<Real> GatherSpeech(const Matrix<Real> &features, const AlignedMask &keep) {
  CheckKeep(features.rows(), keep);
  Matrix<Real> out(keep.count(), features.cols());
  size_t r = 0;
  for (size_t i = 0; i < features.rows(); ++i)
    if (keep.keep[i]) {
      std::copy(features.row(i).begin(), features.row(i).end(),
                out.row(r).begin());
      ++r;
    }
  return out;
}

EffectiveMask ResolveSpeechMask(const AlignedMask &keep) {
  if (keep.count() == 0) return {AlignedMask::All(keep.size()), true};
  return {keep, false};
}

template <typename Real>
SapResult<Real> Sap(const Matrix<Real> &features, const AlignedMask &keep,
                    const AttentionBlock<Real> &attention, bool bypass) {
  if (features.rows() == 0) Fail(ErrorCode::kEmptyMatrix, "SAP over no frames");
  CheckKeep(features.rows(), keep);
  const EffectiveMask eff = ResolveSpeechMask(keep);
  const Matrix<Real> gathered = GatherSpeech(features, eff.mask);
  SapResult<Real> out;
  out.fallback = eff.fallback;
  out.pooled = bypass ? kernels::ColumnMean(gathered)
                      : kernels::ColumnMean(attention.Forward(gathered));
  return out;
}

template <typename Real>
SpeechRepresentation<Real> MakeSpeechRepresentation(
    const Matrix<Real> &features, const AlignedMask &keep,
    const AttentionBlock<Real> &attention, bool bypass) {
  SpeechRepresentation<Real> out;
  out.values = Gap(features);
  const SapResult<Real> sap = Sap(features, keep, attention, bypass);
  out.values.insert(out.values.end(), sap.pooled.begin(), sap.pooled.end());
  out.fallback = sap.fallback;
  return out;
}

#define SAPSER_INSTANTIATE_POOLING(Real)                                    \
  template std::vector<Real> Gap(const Matrix<Real> &);                     \
  template Matrix<Real> GatherSpeech(const Matrix<Real> &,                  \
                                     const AlignedMask &);                  \
  template SapResult<Real> Sap(const Matrix<Real> &, const AlignedMask &,   \
                               const AttentionBlock<Real> &, bool);         \
  template SpeechRepresentation<Real> MakeSpeechRepresentation(             \
      const Matrix<Real> &, const AlignedMask &, const AttentionBlock<Real> &, \
      bool);

SAPSER_INSTANTIATE_POOLING(float)
SAPSER_INSTANTIATE_POOLING(double)

}  // namespace sapser
