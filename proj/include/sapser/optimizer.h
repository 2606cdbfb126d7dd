// include/sapser/optimizer.h

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

#ifndef SAPSER_OPTIMIZER_H_
#define SAPSER_OPTIMIZER_H_

#include <cstddef>
#include <span>
#include <vector>

#include "sapser/layers.h"

namespace sapser {

/// Number of linear warmup steps: ceil(warmup_ratio * total_steps).
size_t WarmupSteps(size_t total_steps, double warmup_ratio);

/// Learning-rate multiplier: linear 0 -> 1 over the warmup steps, then
/// 0.5 * (1 + cos(pi * progress)) down to 0 at total_steps.
double LrSchedule(size_t step, size_t total_steps, double warmup_ratio);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Update k (0-based) uses
/// base_lr * LrSchedule(k, total_steps, warmup_ratio).
template <typename Real>
class Adam {
 public:
  Adam(double base_lr, size_t total_steps, double warmup_ratio,
       AdamConfig config = {});

  /// params[b] and grads[b] must describe the same tensor for every b, in
  /// the same order on every call. Returns the learning rate used.
  double Step(std::span<const ParamBlock<Real>> params,
              std::span<const ParamBlock<Real>> grads);

  size_t step_count() const { return step_; }
  double base_lr() const { return base_lr_; }
  size_t total_steps() const { return total_steps_; }
  double warmup_ratio() const { return warmup_ratio_; }
  double CurrentLr() const;

 private:
  double base_lr_;
  size_t total_steps_;
  double warmup_ratio_;
  AdamConfig config_;
  size_t step_ = 0;
  std::vector<std::vector<Real>> m_, v_;
};

}  // namespace sapser

#endif  // SAPSER_OPTIMIZER_H_
