// include/sapser/pooling.h

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

#ifndef SAPSER_POOLING_H_
#define SAPSER_POOLING_H_

#include <cstdint>
#include <vector>

#include "sapser/features.h"
#include "sapser/layers.h"
#include "sapser/vad.h"

namespace sapser {

/// One keep bit per feature frame.
struct AlignedMask {
  std::vector<uint8_t> keep;

  size_t size() const { return keep.size(); }
  size_t count() const;
  static AlignedMask All(size_t n) { return {std::vector<uint8_t>(n, 1)}; }
};

/// Temporal mean of all frames.
template <typename Real>
std::vector<Real> Gap(const Matrix<Real> &features);
std::vector<float> Gap(const FeatureMatrix &features);

/// Maps VAD decisions onto the feature grid. Feature frame i covers
/// [i*stride, i*stride + window) ms; it is kept when speech VAD frames
/// make up at least half of the part of that span the mask covers. A
/// feature frame lying wholly past the mask takes the last VAD decision.
/// Throws kTimelineMismatch when the features extend more than one VAD
/// frame beyond the mask.
AlignedMask AlignMask(const VadMask &mask, const FeatureMatrix &features);
AlignedMask AlignMask(const VadMask &mask, size_t num_frames, int window_ms,
                      int stride_ms);

/// Rows with keep = 1, in order. May be empty.
template <typename Real>
Matrix<Real> GatherSpeech(const Matrix<Real> &features, const AlignedMask &keep);

/// The mask SAP actually uses: keep itself, or all frames when keep
/// selects nothing (fallback = true).
struct EffectiveMask {
  AlignedMask mask;
  bool fallback = false;
};
EffectiveMask ResolveSpeechMask(const AlignedMask &keep);

template <typename Real>
struct SapResult {
  std::vector<Real> pooled;
  bool fallback = false;
};

/// Mean over the attention outputs of the gathered speech frames, or over
/// the gathered frames themselves when bypass is set.
template <typename Real>
SapResult<Real> Sap(const Matrix<Real> &features, const AlignedMask &keep,
                    const AttentionBlock<Real> &attention, bool bypass);

/// [GAP | SAP], 2d entries.
template <typename Real>
struct SpeechRepresentation {
  std::vector<Real> values;
  bool fallback = false;

  size_t half() const { return values.size() / 2; }
};

template <typename Real>
SpeechRepresentation<Real> MakeSpeechRepresentation(
    const Matrix<Real> &features, const AlignedMask &keep,
    const AttentionBlock<Real> &attention, bool bypass);

}  // namespace sapser

#endif  // SAPSER_POOLING_H_
