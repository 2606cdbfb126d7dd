// include/sapser/grad_check.h

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

#ifndef SAPSER_GRAD_CHECK_H_
#define SAPSER_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sapser/layers.h"

namespace sapser {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;

  bool Passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// Relative error |a - n| / max(|a|, |n|, floor).
double RelativeError(double analytic, double numeric, double floor = 1e-8);

/// Denominator floor used by GradCheck. A central difference at eps = 1e-5
/// of an O(1) loss carries round-off near 1e-11, so an exactly zero
/// analytic gradient (for example MAE subgradients cancelling across a
/// batch) would otherwise never compare equal to its numeric estimate.
inline constexpr double kGradCheckFloor = 1e-6;

/// Compares analytic gradients with central differences of loss() at
/// step eps, perturbing every entry of every block in params. analytic[b]
/// must have the same size as params[b]. Throws kNonFiniteGradient if an
/// analytic entry is not finite.
GradCheckReport GradCheck(const std::function<double()> &loss,
                          std::span<const ParamBlock<double>> params,
                          std::span<const ParamBlock<double>> analytic,
                          double eps = 1e-5);

/// One line of the built-in gradient-check suite.
struct FragmentCheck {
  std::string fragment;
  int instances = 0;
  double max_rel_error = 0.0;
};

/// Checks linear, attention (residual on and off), weighted cross-entropy,
/// MAE and the full pooled-representation head on random 64-bit
/// instances.
std::vector<FragmentCheck> RunGradCheckSuite(uint64_t seed, int instances,
                                             double eps = 1e-5);

}  // namespace sapser

#endif  // SAPSER_GRAD_CHECK_H_
