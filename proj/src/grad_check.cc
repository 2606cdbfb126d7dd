// src/grad_check.cc

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

#include "sapser/grad_check.h"

#include <algorithm>
#include <cmath>

#include "sapser/error.h"
#include "sapser/losses.h"
#include "sapser/model.h"
#include "sapser/rng.h"

namespace sapser {

double RelativeError(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport GradCheck(const std::function<double()> &loss,
                          std::span<const ParamBlock<double>> params,
                          std::span<const ParamBlock<double>> analytic,
                          double eps) {
  if (params.size() != analytic.size())
    Fail(ErrorCode::kShapeMismatch, "gradient block count");
  GradCheckReport report;
  for (size_t b = 0; b < params.size(); ++b) {
    const auto &p = params[b];
    const auto &g = analytic[b];
    if (p.values.size() != g.values.size())
      Fail(ErrorCode::kShapeMismatch, "gradient block " + p.name);
    GradCheckEntry entry{p.name, 0.0};
    for (size_t i = 0; i < p.values.size(); ++i) {
      if (!std::isfinite(g.values[i]))
        Fail(ErrorCode::kNonFiniteGradient, p.name + " has a non-finite entry");
      const double saved = p.values[i];
      p.values[i] = saved + eps;
      const double up = loss();
      p.values[i] = saved - eps;
      const double down = loss();
      p.values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      entry.max_rel_error = std::max(
          entry.max_rel_error, RelativeError(g.values[i], numeric, kGradCheckFloor));
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

namespace {

Matrix<double> RandomMatrix(size_t r, size_t c, Rng *rng) {
  Matrix<double> m(r, c);
  for (double &v : m.flat()) v = rng->Normal();
  return m;
}

// Sum of elementwise products: a linear probe whose gradient is w.
double Probe(const Matrix<double> &y, const Matrix<double> &w) {
  double s = 0.0;
  for (size_t i = 0; i < y.size(); ++i) s += y.flat()[i] * w.flat()[i];
  return s;
}

ParamBlock<double> Block(const std::string &name, Matrix<double> *m) {
  return {name, std::span<double>(m->flat()), {m->rows(), m->cols()}};
}

double CheckLinear(Rng *rng) {
  const size_t in = 2 + rng->Index(5), out = 1 + rng->Index(4), n = 1 + rng->Index(5);
  LinearLayer<double> layer(in, out);
  layer.InitXavier(rng);
  for (double &b : layer.bias) b = rng->Normal();
  Matrix<double> x = RandomMatrix(n, in, rng);
  const Matrix<double> w = RandomMatrix(n, out, rng);

  LinearGrad<double> grad = layer.ZeroGrad();
  Matrix<double> dx = layer.Backward(x, w, &grad);
  std::vector<ParamBlock<double>> params, analytic;
  layer.Append("linear", &params);
  grad.Append("linear", &analytic);
  params.push_back(Block("x", &x));
  analytic.push_back(Block("x", &dx));
  return GradCheck([&] { return Probe(layer.Forward(x), w); }, params, analytic)
      .max_rel_error;
}

double CheckAttention(Rng *rng, bool residual) {
  const size_t heads = 1 + rng->Index(3);
  const size_t dim = heads * (1 + rng->Index(3));
  const size_t n = 1 + rng->Index(5);
  AttentionBlock<double> block(dim, heads, residual);
  block.InitXavier(rng);
  Matrix<double> x = RandomMatrix(n, dim, rng);
  const Matrix<double> w = RandomMatrix(n, dim, rng);

  AttentionCache<double> cache;
  block.Forward(x, &cache);
  AttentionGrad<double> grad = block.ZeroGrad();
  Matrix<double> dx = block.Backward(cache, w, &grad);
  std::vector<ParamBlock<double>> params, analytic;
  block.Append("attention", &params);
  grad.Append("attention", &analytic);
  params.push_back(Block("x", &x));
  analytic.push_back(Block("x", &dx));
  return GradCheck([&] { return Probe(block.Forward(x), w); }, params, analytic)
      .max_rel_error;
}

double CheckCrossEntropy(Rng *rng) {
  const size_t n = 1 + rng->Index(6), k = 2 + rng->Index(4);
  Matrix<double> logits = RandomMatrix(n, k, rng);
  std::vector<int> labels(n);
  for (int &y : labels) y = static_cast<int>(rng->Index(k));
  std::vector<double> weights(k);
  for (double &v : weights) v = rng->Uniform(0.2, 3.0);

  auto ce = WeightedCrossEntropy<double>(logits, labels, weights);
  std::vector<ParamBlock<double>> params{Block("logits", &logits)};
  std::vector<ParamBlock<double>> analytic{Block("logits", &ce.grad)};
  return GradCheck(
             [&] {
               return WeightedCrossEntropy<double>(logits, labels, weights).loss;
             },
             params, analytic)
      .max_rel_error;
}

double CheckMae(Rng *rng, double eps) {
  const size_t n = 1 + rng->Index(8);
  std::vector<double> pred(n), target(n);
  for (size_t i = 0; i < n; ++i) {
    target[i] = rng->Normal();
    // Keep clear of the kink so central differences stay one-sided-free.
    do pred[i] = rng->Normal();
    while (std::abs(pred[i] - target[i]) < 100 * eps);
  }
  auto mae = MaeLoss<double>(pred, target);
  std::vector<ParamBlock<double>> params{{"pred", std::span<double>(pred), {n}}};
  std::vector<ParamBlock<double>> analytic{
      {"pred", std::span<double>(mae.grad), {n}}};
  return GradCheck([&] { return MaeLoss<double>(pred, target).loss; }, params,
                   analytic, eps)
      .max_rel_error;
}

// Full model: standardized frames -> [GAP | SAP] -> projection -> three
// heads, with the multi-task loss over a small batch.
double CheckFullHead(Rng *rng, double eps) {
  ModelConfig cfg;
  cfg.heads = 1 + rng->Index(2);
  cfg.feature_dim = cfg.heads * (2 + rng->Index(2));
  cfg.projection_dim = 3 + rng->Index(3);
  cfg.pooling = PoolingMode::kSr;
  cfg.seed = rng->NextU64();
  SerModel<double> model(cfg);
  std::vector<double> mean(cfg.feature_dim), inv(cfg.feature_dim);
  for (size_t j = 0; j < cfg.feature_dim; ++j) {
    mean[j] = 0.1 * rng->Normal();
    inv[j] = rng->Uniform(0.5, 1.5);
  }
  model.SetStandardization(mean, inv);
  for (auto *l : {&model.projection, &model.classifier, &model.valence_head,
                  &model.arousal_head})
    for (double &b : l->bias) b = 0.1 * rng->Normal();

  const size_t batch = 2 + rng->Index(3);
  std::vector<Matrix<double>> frames;
  std::vector<AlignedMask> keeps;
  std::vector<int> labels(batch);
  std::vector<double> vt(batch), at(batch);
  for (size_t u = 0; u < batch; ++u) {
    const size_t t = 2 + rng->Index(6);
    frames.push_back(RandomMatrix(t, cfg.feature_dim, rng));
    AlignedMask keep{std::vector<uint8_t>(t)};
    // Utterance 0 has no speech and exercises the fallback path.
    if (u > 0)
      for (auto &k : keep.keep) k = rng->Uniform() < 0.6 ? 1 : 0;
    keeps.push_back(std::move(keep));
    labels[u] = static_cast<int>(rng->Index(cfg.num_classes));
    vt[u] = rng->Uniform();
    at[u] = rng->Uniform();
  }
  std::vector<double> weights(cfg.num_classes);
  for (double &w : weights) w = rng->Uniform(0.5, 2.0);
  const MtlWeights mw = cfg.loss;

  auto loss_fn = [&] {
    Matrix<double> logits(batch, cfg.num_classes);
    std::vector<double> v(batch), a(batch);
    for (size_t u = 0; u < batch; ++u) {
      const auto out = model.Forward(frames[u], keeps[u]);
      std::copy(out.logits.begin(), out.logits.end(), logits.row(u).begin());
      v[u] = out.valence;
      a[u] = out.arousal;
    }
    return MtlLoss(WeightedCrossEntropy<double>(logits, labels, weights).loss,
                   MaeLoss<double>(v, vt).loss, MaeLoss<double>(a, at).loss, mw);
  };

  std::vector<UtteranceCache<double>> caches(batch);
  Matrix<double> logits(batch, cfg.num_classes);
  std::vector<double> v(batch), a(batch);
  for (size_t u = 0; u < batch; ++u) {
    const auto out = model.Forward(frames[u], keeps[u], &caches[u]);
    std::copy(out.logits.begin(), out.logits.end(), logits.row(u).begin());
    v[u] = out.valence;
    a[u] = out.arousal;
  }
  // The regression targets must not sit on the MAE kink.
  for (size_t u = 0; u < batch; ++u) {
    if (std::abs(v[u] - vt[u]) < 100 * eps) vt[u] += 0.1;
    if (std::abs(a[u] - at[u]) < 100 * eps) at[u] += 0.1;
  }
  const auto ce = WeightedCrossEntropy<double>(logits, labels, weights);
  const auto mv = MaeLoss<double>(v, vt);
  const auto ma = MaeLoss<double>(a, at);
  ModelGrad<double> grad = model.ZeroGrad();
  std::vector<double> dl(cfg.num_classes);
  for (size_t u = 0; u < batch; ++u) {
    for (size_t c = 0; c < cfg.num_classes; ++c) dl[c] = mw.alpha * ce.grad(u, c);
    model.Backward(caches[u], dl, mw.beta * mv.grad[u], mw.gamma * ma.grad[u],
                   &grad);
  }
  const auto params = model.TrainableBlocks();
  const auto analytic = grad.Blocks();
  return GradCheck(loss_fn, params, analytic, eps).max_rel_error;
}

}  // namespace

std::vector<FragmentCheck> RunGradCheckSuite(uint64_t seed, int instances,
                                             double eps) {
  std::vector<FragmentCheck> out = {{"linear", 0, 0.0},
                                    {"attention_residual", 0, 0.0},
                                    {"attention_plain", 0, 0.0},
                                    {"weighted_cross_entropy", 0, 0.0},
                                    {"mae", 0, 0.0},
                                    {"sr_head", 0, 0.0}};
  for (size_t f = 0; f < out.size(); ++f) {
    Rng rng(MixSeed(seed, f));
    for (int i = 0; i < instances; ++i) {
      double err = 0.0;
      switch (f) {
        case 0: err = CheckLinear(&rng); break;
        case 1: err = CheckAttention(&rng, true); break;
        case 2: err = CheckAttention(&rng, false); break;
        case 3: err = CheckCrossEntropy(&rng); break;
        case 4: err = CheckMae(&rng, eps); break;
        default: err = CheckFullHead(&rng, eps); break;
      }
      out[f].max_rel_error = std::max(out[f].max_rel_error, err);
      ++out[f].instances;
    }
  }
  return out;
}

}  // namespace sapser
