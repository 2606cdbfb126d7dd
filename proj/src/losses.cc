// src/losses.cc

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

#include "sapser/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace sapser {

template <typename Real>
ClassificationLoss<Real> WeightedCrossEntropy(
    const Matrix<Real> &logits, std::span<const int> labels,
    std::span<const Real> class_weights) {
  const size_t n = logits.rows(), k = logits.cols();
  if (labels.size() != n || class_weights.size() != k)
    Fail(ErrorCode::kShapeMismatch, "cross-entropy shapes");
  if (n == 0) Fail(ErrorCode::kEmptyMatrix, "cross-entropy over no samples");
  for (Real w : class_weights)
    if (!(w > 0)) Fail(ErrorCode::kNonPositiveWeight, "class weight <= 0");
  for (int y : labels)
    if (y < 0 || static_cast<size_t>(y) >= k)
      Fail(ErrorCode::kBadLabel, "label " + std::to_string(y) + " with " +
                                     std::to_string(k) + " classes");

  Real norm = 0;
  for (int y : labels) norm += class_weights[y];
  ClassificationLoss<Real> out;
  out.grad = Matrix<Real>(n, k);
  for (size_t i = 0; i < n; ++i) {
    const auto row = logits.row(i);
    const Real mx = *std::max_element(row.begin(), row.end());
    Real sum = 0;
    for (Real z : row) sum += std::exp(z - mx);
    const Real log_sum = std::log(sum) + mx;
    const int y = labels[i];
    const Real w = class_weights[y] / norm;
    out.loss += w * (log_sum - row[y]);
    for (size_t c = 0; c < k; ++c) {
      const Real p = std::exp(row[c] - log_sum);
      out.grad(i, c) = w * (p - (static_cast<int>(c) == y ? Real(1) : Real(0)));
    }
  }
  return out;
}

std::vector<double> ClassWeights(std::span<const size_t> counts) {
  if (counts.empty()) Fail(ErrorCode::kInvalidArgument, "no classes");
  double total = 0;
  for (size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0)
      Fail(ErrorCode::kEmptyClass, "class " + std::to_string(c) +
                                       " has no training samples");
    total += static_cast<double>(counts[c]);
  }
  std::vector<double> w(counts.size());
  for (size_t c = 0; c < counts.size(); ++c)
    w[c] = total / (static_cast<double>(counts.size()) * counts[c]);
  return w;
}

template <typename Real>
RegressionLoss<Real> MaeLoss(std::span<const Real> pred,
                             std::span<const Real> target) {
  if (pred.size() != target.size())
    Fail(ErrorCode::kShapeMismatch, "MAE prediction/target lengths differ");
  if (pred.empty()) Fail(ErrorCode::kEmptyMatrix, "MAE over no samples");
  const Real n = static_cast<Real>(pred.size());
  RegressionLoss<Real> out;
  out.grad.resize(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const Real diff = pred[i] - target[i];
    out.loss += std::abs(diff);
    out.grad[i] = diff > 0 ? Real(1) / n : diff < 0 ? Real(-1) / n : Real(0);
  }
  out.loss /= n;
  return out;
}

double MtlLoss(double discrete, double valence, double arousal,
               const MtlWeights &w) {
  return w.alpha * discrete + w.beta * valence + w.gamma * arousal;
}

template ClassificationLoss<float> WeightedCrossEntropy(
    const Matrix<float> &, std::span<const int>, std::span<const float>);
template ClassificationLoss<double> WeightedCrossEntropy(
    const Matrix<double> &, std::span<const int>, std::span<const double>);
template RegressionLoss<float> MaeLoss(std::span<const float>,
                                       std::span<const float>);
template RegressionLoss<double> MaeLoss(std::span<const double>,
                                        std::span<const double>);

}  // namespace sapser
