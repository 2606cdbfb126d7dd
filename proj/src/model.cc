// src/model.cc

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

#include "sapser/model.h"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "sapser/kernels.h"

namespace sapser {

std::string_view PoolingModeName(PoolingMode mode) {
  switch (mode) {
    case PoolingMode::kGapOnly: return "gap_only";
    case PoolingMode::kSapOnly: return "sap_only";
    case PoolingMode::kSr: return "sr";
  }
  return "sr";
}

PoolingMode ParsePoolingMode(std::string_view name) {
  if (name == "gap" || name == "gap_only") return PoolingMode::kGapOnly;
  if (name == "sap" || name == "sap_only") return PoolingMode::kSapOnly;
  if (name == "sr") return PoolingMode::kSr;
  Fail(ErrorCode::kInvalidArgument,
       "pooling mode must be gap, sap or sr, got '" + std::string(name) + "'");
}

size_t ModelConfig::RepresentationDim() const {
  return pooling == PoolingMode::kSr ? 2 * feature_dim : feature_dim;
}

void ModelConfig::Validate() const {
  if (feature_dim == 0 || projection_dim == 0 || num_classes < 2)
    Fail(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  if (UsesSap() && !bypass_attention && (heads == 0 || feature_dim % heads))
    Fail(ErrorCode::kInvalidArgument, "feature_dim must be divisible by heads");
  if (loss.alpha < 0 || loss.beta < 0 || loss.gamma < 0 ||
      !(loss.alpha + loss.beta + loss.gamma > 0))
    Fail(ErrorCode::kInvalidArgument,
         "loss coefficients must be >= 0 with a positive sum");
  if (batch_size == 0 || epochs == 0)
    Fail(ErrorCode::kInvalidArgument, "batch_size and epochs must be >= 1");
  if (patience == 0)
    Fail(ErrorCode::kInvalidArgument, "patience must be >= 1");
  if (!(base_lr > 0) || warmup_ratio < 0 || warmup_ratio > 1)
    Fail(ErrorCode::kInvalidArgument, "bad learning-rate settings");
}

std::string ModelConfig::Serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "feature_dim=" << feature_dim << "\n"
      << "projection_dim=" << projection_dim << "\n"
      << "heads=" << heads << "\n"
      << "residual=" << residual << "\n"
      << "bypass_attention=" << bypass_attention << "\n"
      << "pooling=" << PoolingModeName(pooling) << "\n"
      << "num_classes=" << num_classes << "\n"
      << "alpha=" << loss.alpha << "\n"
      << "beta=" << loss.beta << "\n"
      << "gamma=" << loss.gamma << "\n"
      << "batch_size=" << batch_size << "\n"
      << "epochs=" << epochs << "\n"
      << "base_lr=" << base_lr << "\n"
      << "warmup_ratio=" << warmup_ratio << "\n"
      << "patience=" << patience << "\n"
      << "seed=" << seed << "\n";
  return out.str();
}

ModelConfig ModelConfig::Parse(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorCode::kParseError, "config line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ModelConfig c;
  auto get = [&](const char *key) -> const std::string & {
    auto it = kv.find(key);
    if (it == kv.end()) Fail(ErrorCode::kParseError, std::string("config missing ") + key);
    return it->second;
  };
  auto u = [&](const char *key) { return static_cast<size_t>(std::stoull(get(key))); };
  auto d = [&](const char *key) { return std::stod(get(key)); };
  try {
    c.feature_dim = u("feature_dim");
    c.projection_dim = u("projection_dim");
    c.heads = u("heads");
    c.residual = u("residual") != 0;
    c.bypass_attention = u("bypass_attention") != 0;
    c.pooling = ParsePoolingMode(get("pooling"));
    c.num_classes = u("num_classes");
    c.loss.alpha = d("alpha");
    c.loss.beta = d("beta");
    c.loss.gamma = d("gamma");
    c.batch_size = u("batch_size");
    c.epochs = u("epochs");
    c.base_lr = d("base_lr");
    c.warmup_ratio = d("warmup_ratio");
    c.patience = u("patience");
    c.seed = std::stoull(get("seed"));
  } catch (const std::logic_error &e) {
    Fail(ErrorCode::kParseError, std::string("bad config value: ") + e.what());
  }
  return c;
}

// ------------------------------------------------------------------ grads

template <typename Real>
void ModelGrad<Real>::SetZero() {
  attention.SetZero();
  projection.SetZero();
  classifier.SetZero();
  valence.SetZero();
  arousal.SetZero();
}

template <typename Real>
void ModelGrad<Real>::Add(const ModelGrad &other) {
  attention.Add(other.attention);
  projection.Add(other.projection);
  classifier.Add(other.classifier);
  valence.Add(other.valence);
  arousal.Add(other.arousal);
}

template <typename Real>
std::vector<ParamBlock<Real>> ModelGrad<Real>::Blocks() {
  std::vector<ParamBlock<Real>> out;
  attention.Append("attention", &out);
  projection.Append("projection", &out);
  classifier.Append("classifier", &out);
  valence.Append("valence", &out);
  arousal.Append("arousal", &out);
  return out;
}

// ------------------------------------------------------------------ model

template <typename Real>
SerModel<Real>::SerModel(const ModelConfig &config) : config_(config) {
  config.Validate();
  const size_t d = config.feature_dim;
  input_mean.assign(d, Real(0));
  input_inv_std.assign(d, Real(1));
  const bool attends = config.UsesSap() && !config.bypass_attention;
  attention = AttentionBlock<Real>(d, attends ? config.heads : 1, config.residual);
  projection = LinearLayer<Real>(config.RepresentationDim(), config.projection_dim);
  classifier = LinearLayer<Real>(config.projection_dim, config.num_classes);
  valence_head = LinearLayer<Real>(config.projection_dim, 1);
  arousal_head = LinearLayer<Real>(config.projection_dim, 1);
  Rng rng(config.seed);
  attention.InitXavier(&rng);
  projection.InitXavier(&rng);
  classifier.InitXavier(&rng);
  valence_head.InitXavier(&rng);
  arousal_head.InitXavier(&rng);
}

template <typename Real>
void SerModel<Real>::SetStandardization(std::vector<Real> mean,
                                        std::vector<Real> inv_std) {
  if (mean.size() != config_.feature_dim || inv_std.size() != config_.feature_dim)
    Fail(ErrorCode::kShapeMismatch, "standardization statistics");
  input_mean = std::move(mean);
  input_inv_std = std::move(inv_std);
}

template <typename Real>
ModelOutput<Real> SerModel<Real>::Forward(const Matrix<Real> &features,
                                          const AlignedMask &keep,
                                          UtteranceCache<Real> *cache) const {
  const size_t d = config_.feature_dim;
  if (features.cols() != d)
    Fail(ErrorCode::kShapeMismatch, "features have " +
                                        std::to_string(features.cols()) +
                                        " dims, model expects " +
                                        std::to_string(d));
  if (features.rows() == 0) Fail(ErrorCode::kEmptyMatrix, "no frames");
  if (keep.size() != features.rows())
    Fail(ErrorCode::kShapeMismatch, "keep mask length");

  Matrix<Real> x(features.rows(), d);
  for (size_t i = 0; i < x.rows(); ++i)
    for (size_t j = 0; j < d; ++j)
      x(i, j) = (features(i, j) - input_mean[j]) * input_inv_std[j];

  UtteranceCache<Real> local;
  UtteranceCache<Real> &c = cache != nullptr ? *cache : local;
  c.pooled = Matrix<Real>(1, config_.RepresentationDim());
  size_t offset = 0;
  if (config_.UsesGap()) {
    const std::vector<Real> g = Gap(x);
    std::copy(g.begin(), g.end(), c.pooled.row(0).begin());
    offset = d;
  }
  c.fallback = false;
  if (config_.UsesSap()) {
    const EffectiveMask eff = ResolveSpeechMask(keep);
    c.fallback = eff.fallback;
    Matrix<Real> gathered = GatherSpeech(x, eff.mask);
    c.speech_rows = gathered.rows();
    const std::vector<Real> s =
        config_.bypass_attention
            ? kernels::ColumnMean(gathered)
            : kernels::ColumnMean(attention.Forward(gathered, &c.attention));
    std::copy(s.begin(), s.end(), c.pooled.row(0).begin() + offset);
  }
  c.projected = projection.Forward(c.pooled);

  ModelOutput<Real> out;
  const Matrix<Real> logits = classifier.Forward(c.projected);
  out.logits.assign(logits.row(0).begin(), logits.row(0).end());
  out.valence = valence_head.Forward(c.projected)(0, 0);
  out.arousal = arousal_head.Forward(c.projected)(0, 0);
  out.fallback = c.fallback;
  return out;
}

template <typename Real>
void SerModel<Real>::Backward(const UtteranceCache<Real> &cache,
                              std::span<const Real> dlogits, Real dvalence,
                              Real darousal, ModelGrad<Real> *grad) const {
  if (dlogits.size() != config_.num_classes)
    Fail(ErrorCode::kShapeMismatch, "logit gradient length");
  Matrix<Real> dl(1, config_.num_classes,
                  std::vector<Real>(dlogits.begin(), dlogits.end()));
  Matrix<Real> dz = classifier.Backward(cache.projected, dl, &grad->classifier);
  const Matrix<Real> dzv = valence_head.Backward(
      cache.projected, Matrix<Real>(1, 1, dvalence), &grad->valence);
  const Matrix<Real> dza = arousal_head.Backward(
      cache.projected, Matrix<Real>(1, 1, darousal), &grad->arousal);
  for (size_t j = 0; j < dz.cols(); ++j) dz(0, j) += dzv(0, j) + dza(0, j);
  const Matrix<Real> dpooled =
      projection.Backward(cache.pooled, dz, &grad->projection);

  if (config_.UsesSap() && !config_.bypass_attention) {
    const size_t d = config_.feature_dim;
    const size_t offset = config_.UsesGap() ? d : 0;
    const size_t n = cache.speech_rows;
    Matrix<Real> dh(n, d);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < d; ++j)
        dh(i, j) = dpooled(0, offset + j) / static_cast<Real>(n);
    attention.Backward(cache.attention, dh, &grad->attention);
  }
}

template <typename Real>
ModelGrad<Real> SerModel<Real>::ZeroGrad() const {
  return {attention.ZeroGrad(), projection.ZeroGrad(), classifier.ZeroGrad(),
          valence_head.ZeroGrad(), arousal_head.ZeroGrad()};
}

template <typename Real>
std::vector<ParamBlock<Real>> SerModel<Real>::TrainableBlocks() {
  std::vector<ParamBlock<Real>> out;
  attention.Append("attention", &out);
  projection.Append("projection", &out);
  classifier.Append("classifier", &out);
  valence_head.Append("valence", &out);
  arousal_head.Append("arousal", &out);
  return out;
}

template <typename Real>
std::vector<ParamBlock<Real>> SerModel<Real>::AllBlocks() {
  std::vector<ParamBlock<Real>> out;
  out.push_back({"input.mean", std::span<Real>(input_mean), {input_mean.size()}});
  out.push_back({"input.inv_std", std::span<Real>(input_inv_std),
                 {input_inv_std.size()}});
  for (auto &b : TrainableBlocks()) out.push_back(std::move(b));
  return out;
}

template struct ModelGrad<float>;
template struct ModelGrad<double>;
template class SerModel<float>;
template class SerModel<double>;

}  // namespace sapser
