// include/sapser/losses.h

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

#ifndef SAPSER_LOSSES_H_
#define SAPSER_LOSSES_H_

#include <span>
#include <vector>

#include "sapser/matrix.h"

namespace sapser {

template <typename Real>
struct ClassificationLoss {
  Real loss = 0;
  Matrix<Real> grad;  // dL/dlogits, n x K
};

/// L = sum_i w[y_i] * -log softmax(logits_i)[y_i] / sum_i w[y_i].
template <typename Real>
ClassificationLoss<Real> WeightedCrossEntropy(const Matrix<Real> &logits,
                                              std::span<const int> labels,
                                              std::span<const Real> class_weights);

/// Inverse-frequency weights N / (K * n_c); they average to one over
/// samples. Every class needs at least one sample.
std::vector<double> ClassWeights(std::span<const size_t> counts);

template <typename Real>
struct RegressionLoss {
  Real loss = 0;
  std::vector<Real> grad;
};

/// Mean absolute error. The subgradient at an exact tie is 0.
template <typename Real>
RegressionLoss<Real> MaeLoss(std::span<const Real> pred,
                             std::span<const Real> target);

struct MtlWeights {
  double alpha = 0.5;  // discrete emotion
  double beta = 0.25;  // valence
  double gamma = 0.25; // arousal

  bool operator==(const MtlWeights &) const = default;
};

double MtlLoss(double discrete, double valence, double arousal,
               const MtlWeights &w);

}  // namespace sapser

#endif  // SAPSER_LOSSES_H_
