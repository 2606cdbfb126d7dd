// include/sapser/model.h

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

#ifndef SAPSER_MODEL_H_
#define SAPSER_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sapser/layers.h"
#include "sapser/losses.h"
#include "sapser/pooling.h"

namespace sapser {

enum class PoolingMode { kGapOnly, kSapOnly, kSr };

std::string_view PoolingModeName(PoolingMode mode);
/// Accepts gap, gap_only, sap, sap_only, sr.
PoolingMode ParsePoolingMode(std::string_view name);

struct ModelConfig {
  size_t feature_dim = 40;
  size_t projection_dim = 32;
  size_t heads = 4;
  bool residual = true;
  bool bypass_attention = false;
  PoolingMode pooling = PoolingMode::kSr;
  size_t num_classes = 4;
  MtlWeights loss;
  size_t batch_size = 64;
  size_t epochs = 30;
  double base_lr = 3e-5;
  double warmup_ratio = 0.1;
  size_t patience = 5;
  uint64_t seed = 0;

  /// Width of the pooled vector fed to the projection: d, d or 2d.
  size_t RepresentationDim() const;
  bool UsesGap() const { return pooling != PoolingMode::kSapOnly; }
  bool UsesSap() const { return pooling != PoolingMode::kGapOnly; }
  void Validate() const;

  /// Flat key=value lines; Parse accepts the same.
  std::string Serialize() const;
  static ModelConfig Parse(std::string_view text);
  bool operator==(const ModelConfig &) const = default;
};

template <typename Real>
struct ModelGrad {
  AttentionGrad<Real> attention;
  LinearGrad<Real> projection, classifier, valence, arousal;

  void SetZero();
  void Add(const ModelGrad &other);
  /// Same order as SerModel::TrainableBlocks.
  std::vector<ParamBlock<Real>> Blocks();
};

template <typename Real>
struct UtteranceCache {
  Matrix<Real> pooled;      // 1 x RepresentationDim
  Matrix<Real> projected;   // 1 x projection_dim
  size_t speech_rows = 0;
  bool fallback = false;
  AttentionCache<Real> attention;
};

template <typename Real>
struct ModelOutput {
  std::vector<Real> logits;
  Real valence = 0;
  Real arousal = 0;
  bool fallback = false;
};

/// Frame features -> standardization -> GAP and/or SAP -> linear
/// projection -> {classifier, valence regressor, arousal regressor}.
template <typename Real>
class SerModel {
 public:
  SerModel() = default;
  /// Parameters drawn from config.seed.
  explicit SerModel(const ModelConfig &config);

  const ModelConfig &config() const { return config_; }

  ModelOutput<Real> Forward(const Matrix<Real> &features,
                            const AlignedMask &keep,
                            UtteranceCache<Real> *cache = nullptr) const;
  /// Accumulates parameter gradients for one utterance into grad.
  void Backward(const UtteranceCache<Real> &cache,
                std::span<const Real> dlogits, Real dvalence, Real darousal,
                ModelGrad<Real> *grad) const;

  ModelGrad<Real> ZeroGrad() const;
  std::vector<ParamBlock<Real>> TrainableBlocks();
  /// Trainable blocks plus the input standardization statistics.
  std::vector<ParamBlock<Real>> AllBlocks();

  /// Per-dimension mean and inverse standard deviation applied to input
  /// frames before pooling.
  void SetStandardization(std::vector<Real> mean, std::vector<Real> inv_std);

  template <typename Other>
  SerModel<Other> Cast() const {
    SerModel<Other> m;
    m.config_ = config_;
    m.input_mean.assign(input_mean.begin(), input_mean.end());
    m.input_inv_std.assign(input_inv_std.begin(), input_inv_std.end());
    m.attention = attention.template Cast<Other>();
    m.projection = projection.template Cast<Other>();
    m.classifier = classifier.template Cast<Other>();
    m.valence_head = valence_head.template Cast<Other>();
    m.arousal_head = arousal_head.template Cast<Other>();
    return m;
  }

  std::vector<Real> input_mean, input_inv_std;
  AttentionBlock<Real> attention;
  LinearLayer<Real> projection, classifier, valence_head, arousal_head;

 private:
  template <typename>
  friend class SerModel;
  ModelConfig config_;
};

}  // namespace sapser

#endif  // SAPSER_MODEL_H_
