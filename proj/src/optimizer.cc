// src/optimizer.cc

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

#include "sapser/optimizer.h"

#include <cmath>
#include <numbers>

namespace sapser {

size_t WarmupSteps(size_t total_steps, double warmup_ratio) {
  return static_cast<size_t>(std::ceil(warmup_ratio * total_steps));
}

double LrSchedule(size_t step, size_t total_steps, double warmup_ratio) {
  if (step >= total_steps) return 0.0;
  const size_t warmup = WarmupSteps(total_steps, warmup_ratio);
  if (step < warmup)
    return static_cast<double>(step) / static_cast<double>(warmup);
  const double progress = static_cast<double>(step - warmup) /
                          static_cast<double>(total_steps - warmup);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename Real>
Adam<Real>::Adam(double base_lr, size_t total_steps, double warmup_ratio,
                 AdamConfig config)
    : base_lr_(base_lr),
      total_steps_(total_steps),
      warmup_ratio_(warmup_ratio),
      config_(config) {}

template <typename Real>
double Adam<Real>::CurrentLr() const {
  return base_lr_ * LrSchedule(step_, total_steps_, warmup_ratio_);
}

template <typename Real>
double Adam<Real>::Step(std::span<const ParamBlock<Real>> params,
                        std::span<const ParamBlock<Real>> grads) {
  if (params.size() != grads.size())
    Fail(ErrorCode::kShapeMismatch, "Adam: parameter/gradient block counts");
  if (m_.empty()) {
    for (const auto &p : params) {
      m_.emplace_back(p.values.size(), Real(0));
      v_.emplace_back(p.values.size(), Real(0));
    }
  }
  if (m_.size() != params.size())
    Fail(ErrorCode::kShapeMismatch, "Adam: block count changed");
  const double lr = CurrentLr();
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (size_t b = 0; b < params.size(); ++b) {
    auto p = params[b].values;
    auto g = grads[b].values;
    if (p.size() != g.size() || p.size() != m_[b].size())
      Fail(ErrorCode::kShapeMismatch, "Adam: block '" + params[b].name + "'");
    auto &m = m_[b];
    auto &v = v_[b];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = static_cast<Real>(config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i]);
      v[i] = static_cast<Real>(config_.beta2 * v[i] +
                               (1.0 - config_.beta2) * g[i] * g[i]);
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] = static_cast<Real>(p[i] - lr * mhat / (std::sqrt(vhat) + config_.eps));
    }
  }
  return lr;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace sapser
