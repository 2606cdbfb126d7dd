// src/training.cc

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

#include "sapser/training.h"

#include <cmath>
#include <exception>
#include <numeric>

#include "json.hpp"
#include "sapser/optimizer.h"

namespace sapser {
namespace {

using json = nlohmann::json;

// Runs body(i) for i in [0, n) on OpenMP threads and rethrows the first
// failure (lowest index) afterwards.
template <typename Body>
void ParallelFor(size_t n, Body body) {
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

void CheckExamples(std::span<const Example> examples, const ModelConfig &config,
                   const char *what) {
  for (const Example &ex : examples) {
    if (ex.features == nullptr)
      Fail(ErrorCode::kInvalidArgument, std::string(what) + " example '" +
                                            ex.id + "' has no features");
    if (ex.label < 0 || static_cast<size_t>(ex.label) >= config.num_classes)
      Fail(ErrorCode::kBadLabel, ex.id);
  }
}

void ComputeStandardization(std::span<const Example> train, size_t d,
                            std::vector<float> *mean, std::vector<float> *inv_std) {
  std::vector<double> sum(d, 0.0), sq(d, 0.0);
  size_t frames = 0;
  for (const Example &ex : train) {
    const Matrix<float> &f = *ex.features;
    for (size_t i = 0; i < f.rows(); ++i)
      for (size_t j = 0; j < d; ++j) {
        sum[j] += f(i, j);
        sq[j] += static_cast<double>(f(i, j)) * f(i, j);
      }
    frames += f.rows();
  }
  mean->resize(d);
  inv_std->resize(d);
  for (size_t j = 0; j < d; ++j) {
    const double m = sum[j] / frames;
    const double var = std::max(0.0, sq[j] / frames - m * m);
    const double sd = std::sqrt(var);
    (*mean)[j] = static_cast<float>(m);
    (*inv_std)[j] = static_cast<float>(sd > 1e-6 ? 1.0 / sd : 1.0);
  }
}

struct BatchLoss {
  LossBreakdown parts;
  Matrix<float> dlogits;
  std::vector<float> dvalence, darousal;
};

BatchLoss ComputeBatchLoss(const std::vector<ModelOutput<float>> &outputs,
                           std::span<const Example> examples,
                           std::span<const size_t> index,
                           std::span<const float> class_weights,
                           const MtlWeights &w) {
  const size_t n = index.size(), k = class_weights.size();
  Matrix<float> logits(n, k);
  std::vector<int> labels(n);
  std::vector<float> pv(n), pa(n), tv(n), ta(n);
  for (size_t b = 0; b < n; ++b) {
    const Example &ex = examples[index[b]];
    std::copy(outputs[b].logits.begin(), outputs[b].logits.end(),
              logits.row(b).begin());
    labels[b] = ex.label;
    pv[b] = outputs[b].valence;
    pa[b] = outputs[b].arousal;
    tv[b] = ex.valence;
    ta[b] = ex.arousal;
  }
  const auto ce = WeightedCrossEntropy<float>(logits, labels, class_weights);
  const auto mv = MaeLoss<float>(pv, tv);
  const auto ma = MaeLoss<float>(pa, ta);
  BatchLoss out;
  out.parts.discrete = ce.loss;
  out.parts.valence = mv.loss;
  out.parts.arousal = ma.loss;
  out.parts.total = MtlLoss(ce.loss, mv.loss, ma.loss, w);
  out.dlogits = ce.grad;
  for (float &g : out.dlogits.flat()) g *= static_cast<float>(w.alpha);
  out.dvalence.resize(n);
  out.darousal.resize(n);
  for (size_t b = 0; b < n; ++b) {
    out.dvalence[b] = static_cast<float>(w.beta) * mv.grad[b];
    out.darousal[b] = static_cast<float>(w.gamma) * ma.grad[b];
  }
  return out;
}

std::vector<float> ToFloat(std::span<const double> v) {
  return std::vector<float>(v.begin(), v.end());
}

}  // namespace

EarlyStopping::EarlyStopping(size_t patience) : patience_(patience) {
  if (patience == 0)
    Fail(ErrorCode::kInvalidArgument, "early-stopping patience must be >= 1");
}

bool EarlyStopping::Update(double val_loss) {
  ++epoch_;
  if (best_epoch_ == 0 || val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch_;
    bad_epochs_ = 0;
    return true;
  }
  ++bad_epochs_;
  return false;
}

std::vector<size_t> CountLabels(std::span<const Example> examples,
                                size_t num_classes) {
  std::vector<size_t> counts(num_classes, 0);
  for (const Example &ex : examples) {
    if (ex.label < 0 || static_cast<size_t>(ex.label) >= num_classes)
      Fail(ErrorCode::kBadLabel, ex.id);
    ++counts[ex.label];
  }
  return counts;
}

LossBreakdown EvaluateLoss(const SerModel<float> &model,
                           std::span<const Example> examples,
                           std::span<const double> class_weights) {
  if (examples.empty()) Fail(ErrorCode::kEmptyMatrix, "empty evaluation set");
  std::vector<ModelOutput<float>> outputs(examples.size());
  ParallelFor(examples.size(), [&](size_t i) {
    outputs[i] = model.Forward(*examples[i].features, examples[i].keep);
  });
  std::vector<size_t> index(examples.size());
  std::iota(index.begin(), index.end(), 0);
  const std::vector<float> w = ToFloat(class_weights);
  return ComputeBatchLoss(outputs, examples, index, w, model.config().loss).parts;
}

std::vector<Prediction> Predict(const SerModel<float> &model,
                                std::span<const Example> examples) {
  std::vector<Prediction> out(examples.size());
  ParallelFor(examples.size(), [&](size_t i) {
    const auto o = model.Forward(*examples[i].features, examples[i].keep);
    const auto best = std::max_element(o.logits.begin(), o.logits.end());
    out[i].label = static_cast<int>(best - o.logits.begin());
    out[i].valence = o.valence;
    out[i].arousal = o.arousal;
    out[i].fallback = o.fallback;
  });
  return out;
}

TrainedModel Train(const ModelConfig &config, std::span<const Example> train,
                   std::span<const Example> val, std::ostream *log) {
  config.Validate();
  if (train.empty()) Fail(ErrorCode::kInvalidArgument, "empty training set");
  if (val.empty()) Fail(ErrorCode::kInvalidArgument, "empty validation set");
  CheckExamples(train, config, "training");
  CheckExamples(val, config, "validation");

  TrainedModel result{SerModel<float>(config), {}};
  TrainingDiagnostics &diag = result.diagnostics;
  diag.seed = config.seed;
  diag.class_weights = ClassWeights(CountLabels(train, config.num_classes));
  const std::vector<float> weights = ToFloat(diag.class_weights);

  SerModel<float> &model = result.model;
  {
    std::vector<float> mean, inv_std;
    ComputeStandardization(train, config.feature_dim, &mean, &inv_std);
    model.SetStandardization(std::move(mean), std::move(inv_std));
  }

  const size_t steps_per_epoch =
      (train.size() + config.batch_size - 1) / config.batch_size;
  diag.total_steps = steps_per_epoch * config.epochs;
  Adam<float> adam(config.base_lr, diag.total_steps, config.warmup_ratio);

  if (log != nullptr) {
    json rec = {{"type", "config"},
                {"alpha", config.loss.alpha},
                {"beta", config.loss.beta},
                {"gamma", config.loss.gamma},
                {"projection_dim", config.projection_dim},
                {"patience", config.patience},
                {"warmup_ratio", config.warmup_ratio},
                {"lr_schedule", "linear_warmup_cosine"},
                {"base_lr", config.base_lr},
                {"batch_size", config.batch_size},
                {"epochs", config.epochs},
                {"pooling", PoolingModeName(config.pooling)},
                {"heads", config.heads},
                {"residual", config.residual},
                {"bypass_attention", config.bypass_attention},
                {"seed", config.seed},
                {"total_steps", diag.total_steps},
                {"warmup_steps", WarmupSteps(diag.total_steps, config.warmup_ratio)},
                {"class_weights", diag.class_weights},
                {"train_size", train.size()},
                {"val_size", val.size()}};
    *log << rec.dump() << "\n";
  }

  EarlyStopping stopper(config.patience);
  SerModel<float> best = model;
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<UtteranceCache<float>> caches(config.batch_size);
  std::vector<ModelOutput<float>> outputs(config.batch_size);
  std::vector<ModelGrad<float>> slot_grads(config.batch_size, model.ZeroGrad());
  ModelGrad<float> grad = model.ZeroGrad();

  for (size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng(MixSeed(config.seed, 1000 + epoch));
    shuffle_rng.Shuffle(order);
    double loss_sum = 0.0;
    size_t fallbacks = 0;
    double lr = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t n = std::min(config.batch_size, order.size() - start);
      const std::span<const size_t> index(order.data() + start, n);
      ParallelFor(n, [&](size_t b) {
        outputs[b] = model.Forward(*train[index[b]].features,
                                   train[index[b]].keep, &caches[b]);
      });
      const std::vector<ModelOutput<float>> batch_out(outputs.begin(),
                                                      outputs.begin() + n);
      const BatchLoss loss =
          ComputeBatchLoss(batch_out, train, index, weights, config.loss);
      if (!std::isfinite(loss.parts.total))
        Fail(ErrorCode::kDivergedLoss,
             "non-finite training loss at epoch " + std::to_string(epoch));
      ParallelFor(n, [&](size_t b) {
        slot_grads[b].SetZero();
        model.Backward(caches[b], loss.dlogits.row(b), loss.dvalence[b],
                       loss.darousal[b], &slot_grads[b]);
      });
      // Fixed reduction order keeps runs bit-reproducible.
      grad.SetZero();
      for (size_t b = 0; b < n; ++b) {
        grad.Add(slot_grads[b]);
        fallbacks += batch_out[b].fallback ? 1 : 0;
      }
      const size_t step = adam.step_count();
      const double multiplier =
          LrSchedule(step, diag.total_steps, config.warmup_ratio);
      auto params = model.TrainableBlocks();
      auto grads = grad.Blocks();
      lr = adam.Step(params, grads);
      diag.lr_multipliers.push_back(multiplier);
      loss_sum += loss.parts.total * n;
      if (log != nullptr) {
        json rec = {{"type", "step"},       {"epoch", epoch},
                    {"step", step},         {"lr_multiplier", multiplier},
                    {"lr", lr},             {"loss", loss.parts.total}};
        *log << rec.dump() << "\n";
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / train.size();
    record.val = EvaluateLoss(model, val, diag.class_weights);
    record.lr = lr;
    record.fallbacks = fallbacks;
    diag.sap_fallbacks += fallbacks;
    if (!std::isfinite(record.val.total))
      Fail(ErrorCode::kDivergedLoss,
           "non-finite validation loss at epoch " + std::to_string(epoch));
    diag.epochs.push_back(record);
    if (stopper.Update(record.val.total)) best = model;
    if (log != nullptr) {
      json rec = {{"type", "epoch"},
                  {"epoch", epoch},
                  {"train_loss", record.train_loss},
                  {"val_loss", record.val.total},
                  {"val_discrete", record.val.discrete},
                  {"val_valence", record.val.valence},
                  {"val_arousal", record.val.arousal},
                  {"lr", record.lr},
                  {"fallback_count", fallbacks}};
      *log << rec.dump() << "\n";
    }
    if (stopper.ShouldStop() && epoch < config.epochs) {
      diag.early_stopped = true;
      break;
    }
  }

  diag.best_epoch = stopper.best_epoch();
  diag.best_val_loss = stopper.best_loss();
  if (log != nullptr) {
    if (!diag.early_stopped) {
      json rec = {{"type", "schedule_end"},
                  {"step", diag.total_steps},
                  {"lr_multiplier",
                   LrSchedule(diag.total_steps, diag.total_steps,
                              config.warmup_ratio)}};
      *log << rec.dump() << "\n";
    }
    json rec = {{"type", "summary"},
                {"best_epoch", diag.best_epoch},
                {"best_val_loss", diag.best_val_loss},
                {"epochs_run", diag.epochs.size()},
                {"early_stopped", diag.early_stopped},
                {"sap_fallbacks", diag.sap_fallbacks}};
    *log << rec.dump() << "\n";
  }
  result.model = std::move(best);
  return result;
}

}  // namespace sapser
