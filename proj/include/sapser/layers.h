// include/sapser/layers.h

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

#ifndef SAPSER_LAYERS_H_
#define SAPSER_LAYERS_H_

#include <span>
#include <string>
#include <vector>

#include "sapser/matrix.h"
#include "sapser/rng.h"

namespace sapser {

/// A named view over one parameter (or gradient) tensor.
template <typename Real>
struct ParamBlock {
  std::string name;
  std::span<Real> values;
  std::vector<size_t> shape;
};

template <typename Real>
struct LinearGrad {
  Matrix<Real> weight;
  std::vector<Real> bias;

  void SetZero();
  void Add(const LinearGrad &other);
  void Append(const std::string &prefix, std::vector<ParamBlock<Real>> *out);
};

/// y = x W^T + b, applied to each row of x.
template <typename Real>
class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(size_t in_dim, size_t out_dim);

  size_t in_dim() const { return weight.cols(); }
  size_t out_dim() const { return weight.rows(); }

  void InitXavier(Rng *rng);
  LinearGrad<Real> ZeroGrad() const;

  Matrix<Real> Forward(const Matrix<Real> &x) const;
  /// Accumulates parameter gradients into grad and returns dL/dx.
  Matrix<Real> Backward(const Matrix<Real> &x, const Matrix<Real> &dy,
                        LinearGrad<Real> *grad) const;

  void Append(const std::string &prefix, std::vector<ParamBlock<Real>> *out);

  template <typename Other>
  LinearLayer<Other> Cast() const {
    LinearLayer<Other> l;
    l.weight = weight.template Cast<Other>();
    l.bias.assign(bias.begin(), bias.end());
    return l;
  }

  Matrix<Real> weight;  // out x in
  std::vector<Real> bias;
};

template <typename Real>
struct AttentionGrad {
  Matrix<Real> wq, wk, wv, wo;

  void SetZero();
  void Add(const AttentionGrad &other);
  void Append(const std::string &prefix, std::vector<ParamBlock<Real>> *out);
};

/// Intermediate values kept by AttentionBlock::Forward for the backward pass.
template <typename Real>
struct AttentionCache {
  Matrix<Real> x, q, k, v;
  std::vector<Matrix<Real>> probs;  // one n x n softmax matrix per head
  Matrix<Real> heads;               // concatenated head outputs, n x d
};

/// Multi-head scaled dot-product self-attention over the rows of x.
/// Per head h with width d/H:
///   A_h = softmax(Q_h K_h^T / sqrt(d/H)),  O_h = A_h V_h
/// and the output is concat(O_1..O_H) W_o^T, plus x when residual is set.
/// Q, K, V are x W_q^T, x W_k^T, x W_v^T (no biases).
template <typename Real>
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(size_t dim, size_t heads, bool residual);

  size_t dim() const { return wq.rows(); }
  size_t heads() const { return heads_; }
  bool residual() const { return residual_; }

  void InitXavier(Rng *rng);
  AttentionGrad<Real> ZeroGrad() const;

  Matrix<Real> Forward(const Matrix<Real> &x,
                       AttentionCache<Real> *cache = nullptr) const;
  Matrix<Real> Backward(const AttentionCache<Real> &cache,
                        const Matrix<Real> &dy, AttentionGrad<Real> *grad) const;

  void Append(const std::string &prefix, std::vector<ParamBlock<Real>> *out);

  template <typename Other>
  AttentionBlock<Other> Cast() const {
    AttentionBlock<Other> b(dim(), heads_, residual_);
    b.wq = wq.template Cast<Other>();
    b.wk = wk.template Cast<Other>();
    b.wv = wv.template Cast<Other>();
    b.wo = wo.template Cast<Other>();
    return b;
  }

  Matrix<Real> wq, wk, wv, wo;  // each d x d

 private:
  size_t heads_ = 1;
  bool residual_ = true;
};

/// Row-wise softmax with max subtraction, in place.
template <typename Real>
void SoftmaxRows(Matrix<Real> *m);

}  // namespace sapser

#endif  // SAPSER_LAYERS_H_
