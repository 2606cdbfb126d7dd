// src/layers.cc

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

#include "sapser/layers.h"

#include <algorithm>
#include <cmath>

#include "sapser/kernels.h"

namespace sapser {
namespace {

template <typename Real>
void XavierFill(Matrix<Real> *m, Rng *rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m->rows() + m->cols()));
  for (Real &v : m->flat()) v = static_cast<Real>(rng->Uniform(-limit, limit));
}

template <typename Real>
void AddInto(Matrix<Real> *dst, const Matrix<Real> &src) {
  for (size_t k = 0; k < dst->size(); ++k) dst->data()[k] += src.data()[k];
}

template <typename Real>
ParamBlock<Real> Block(const std::string &name, Matrix<Real> *m) {
  return {name, m->flat(), {m->rows(), m->cols()}};
}

template <typename Real>
ParamBlock<Real> Block(const std::string &name, std::vector<Real> *v) {
  return {name, std::span<Real>(*v), {v->size()}};
}

// Columns [col, col + width) of m.
template <typename Real>
Matrix<Real> Slice(const Matrix<Real> &m, size_t col, size_t width) {
  Matrix<Real> out(m.rows(), width);
  for (size_t i = 0; i < m.rows(); ++i)
    std::copy_n(m.row(i).begin() + col, width, out.row(i).begin());
  return out;
}

template <typename Real>
void Unslice(const Matrix<Real> &part, size_t col, Matrix<Real> *m) {
  for (size_t i = 0; i < m->rows(); ++i)
    std::copy_n(part.row(i).begin(), part.cols(), m->row(i).begin() + col);
}

}  // namespace

template <typename Real>
void SoftmaxRows(Matrix<Real> *m) {
  for (size_t i = 0; i < m->rows(); ++i) {
    auto r = m->row(i);
    const Real mx = *std::max_element(r.begin(), r.end());
    Real sum = 0;
    for (Real &v : r) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (Real &v : r) v /= sum;
  }
}

// ---------------------------------------------------------------- linear

template <typename Real>
void LinearGrad<Real>::SetZero() {
  weight.SetZero();
  std::fill(bias.begin(), bias.end(), Real(0));
}

template <typename Real>
void LinearGrad<Real>::Add(const LinearGrad &other) {
  AddInto(&weight, other.weight);
  for (size_t j = 0; j < bias.size(); ++j) bias[j] += other.bias[j];
}

template <typename Real>
void LinearGrad<Real>::Append(const std::string &prefix,
                              std::vector<ParamBlock<Real>> *out) {
  out->push_back(Block(prefix + ".weight", &weight));
  out->push_back(Block(prefix + ".bias", &bias));
}

template <typename Real>
LinearLayer<Real>::LinearLayer(size_t in_dim, size_t out_dim)
    : weight(out_dim, in_dim), bias(out_dim, Real(0)) {}

template <typename Real>
void LinearLayer<Real>::InitXavier(Rng *rng) {
  XavierFill(&weight, rng);
  std::fill(bias.begin(), bias.end(), Real(0));
}

template <typename Real>
LinearGrad<Real> LinearLayer<Real>::ZeroGrad() const {
  return {Matrix<Real>(weight.rows(), weight.cols()),
          std::vector<Real>(bias.size(), Real(0))};
}

template <typename Real>
Matrix<Real> LinearLayer<Real>::Forward(const Matrix<Real> &x) const {
  if (x.cols() != in_dim())
    Fail(ErrorCode::kShapeMismatch, "linear input has " +
                                        std::to_string(x.cols()) +
                                        " columns, layer expects " +
                                        std::to_string(in_dim()));
  Matrix<Real> y = kernels::MatMulNT(x, weight);
  for (size_t i = 0; i < y.rows(); ++i)
    for (size_t j = 0; j < y.cols(); ++j) y(i, j) += bias[j];
  return y;
}

template <typename Real>
Matrix<Real> LinearLayer<Real>::Backward(const Matrix<Real> &x,
                                         const Matrix<Real> &dy,
                                         LinearGrad<Real> *grad) const {
  CheckShape(dy, x.rows(), out_dim(), "linear upstream gradient");
  CheckShape(grad->weight, out_dim(), in_dim(), "linear weight gradient");
  AddInto(&grad->weight, kernels::MatMulTN(dy, x));
  for (size_t i = 0; i < dy.rows(); ++i)
    for (size_t j = 0; j < dy.cols(); ++j) grad->bias[j] += dy(i, j);
  return kernels::MatMulNN(dy, weight);
}

template <typename Real>
void LinearLayer<Real>::Append(const std::string &prefix,
                               std::vector<ParamBlock<Real>> *out) {
  out->push_back(Block(prefix + ".weight", &weight));
  out->push_back(Block(prefix + ".bias", &bias));
}

// ------------------------------------------------------------- attention

template <typename Real>
void AttentionGrad<Real>::SetZero() {
  wq.SetZero();
  wk.SetZero();
  wv.SetZero();
  wo.SetZero();
}

template <typename Real>
void AttentionGrad<Real>::Add(const AttentionGrad &other) {
  AddInto(&wq, other.wq);
  AddInto(&wk, other.wk);
  AddInto(&wv, other.wv);
  AddInto(&wo, other.wo);
}

template <typename Real>
void AttentionGrad<Real>::Append(const std::string &prefix,
                                 std::vector<ParamBlock<Real>> *out) {
  out->push_back(Block(prefix + ".wq", &wq));
  out->push_back(Block(prefix + ".wk", &wk));
  out->push_back(Block(prefix + ".wv", &wv));
  out->push_back(Block(prefix + ".wo", &wo));
}

template <typename Real>
AttentionBlock<Real>::AttentionBlock(size_t dim, size_t heads, bool residual)
    : wq(dim, dim), wk(dim, dim), wv(dim, dim), wo(dim, dim),
      heads_(heads), residual_(residual) {
  if (heads == 0 || dim % heads != 0)
    Fail(ErrorCode::kInvalidArgument, "attention dim " + std::to_string(dim) +
                                          " not divisible by " +
                                          std::to_string(heads) + " heads");
}

template <typename Real>
void AttentionBlock<Real>::InitXavier(Rng *rng) {
  XavierFill(&wq, rng);
  XavierFill(&wk, rng);
  XavierFill(&wv, rng);
  XavierFill(&wo, rng);
}

template <typename Real>
AttentionGrad<Real> AttentionBlock<Real>::ZeroGrad() const {
  const size_t d = dim();
  return {Matrix<Real>(d, d), Matrix<Real>(d, d), Matrix<Real>(d, d),
          Matrix<Real>(d, d)};
}

template <typename Real>
Matrix<Real> AttentionBlock<Real>::Forward(const Matrix<Real> &x,
                                           AttentionCache<Real> *cache) const {
  const size_t n = x.rows(), d = dim();
  if (n == 0) Fail(ErrorCode::kEmptyMatrix, "attention over zero rows");
  if (x.cols() != d)
    Fail(ErrorCode::kShapeMismatch, "attention input has " +
                                        std::to_string(x.cols()) +
                                        " columns, block expects " +
                                        std::to_string(d));
  const size_t width = d / heads_;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(width));

  Matrix<Real> q = kernels::MatMulNT(x, wq);
  Matrix<Real> k = kernels::MatMulNT(x, wk);
  Matrix<Real> v = kernels::MatMulNT(x, wv);
  Matrix<Real> heads(n, d);
  std::vector<Matrix<Real>> probs;
  probs.reserve(heads_);
  for (size_t h = 0; h < heads_; ++h) {
    const size_t col = h * width;
    Matrix<Real> scores =
        kernels::MatMulNT(Slice(q, col, width), Slice(k, col, width));
    for (Real &s : scores.flat()) s *= scale;
    SoftmaxRows(&scores);
    Unslice(kernels::MatMulNN(scores, Slice(v, col, width)), col, &heads);
    probs.push_back(std::move(scores));
  }
  Matrix<Real> y = kernels::MatMulNT(heads, wo);
  if (residual_)
    for (size_t idx = 0; idx < y.size(); ++idx) y.data()[idx] += x.data()[idx];
  if (cache != nullptr) {
    cache->x = x;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->heads = std::move(heads);
  }
  return y;
}

template <typename Real>
Matrix<Real> AttentionBlock<Real>::Backward(const AttentionCache<Real> &cache,
                                            const Matrix<Real> &dy,
                                            AttentionGrad<Real> *grad) const {
  const size_t n = cache.x.rows(), d = dim();
  CheckShape(dy, n, d, "attention upstream gradient");
  CheckShape(grad->wq, d, d, "attention gradient");
  const size_t width = d / heads_;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(width));

  AddInto(&grad->wo, kernels::MatMulTN(dy, cache.heads));
  const Matrix<Real> dheads = kernels::MatMulNN(dy, wo);

  Matrix<Real> dq(n, d), dk(n, d), dv(n, d);
  for (size_t h = 0; h < heads_; ++h) {
    const size_t col = h * width;
    const Matrix<Real> &a = cache.probs[h];
    const Matrix<Real> dout = Slice(dheads, col, width);
    const Matrix<Real> vh = Slice(cache.v, col, width);
    Unslice(kernels::MatMulTN(a, dout), col, &dv);
    Matrix<Real> dscores = kernels::MatMulNT(dout, vh);  // dL/dA
    // Softmax backward per row: dS = A * (dA - sum_j dA_j A_j).
    for (size_t i = 0; i < n; ++i) {
      Real dot = 0;
      for (size_t j = 0; j < n; ++j) dot += dscores(i, j) * a(i, j);
      for (size_t j = 0; j < n; ++j)
        dscores(i, j) = a(i, j) * (dscores(i, j) - dot) * scale;
    }
    Unslice(kernels::MatMulNN(dscores, Slice(cache.k, col, width)), col, &dq);
    Unslice(kernels::MatMulTN(dscores, Slice(cache.q, col, width)), col, &dk);
  }
  AddInto(&grad->wq, kernels::MatMulTN(dq, cache.x));
  AddInto(&grad->wk, kernels::MatMulTN(dk, cache.x));
  AddInto(&grad->wv, kernels::MatMulTN(dv, cache.x));

  Matrix<Real> dx = kernels::MatMulNN(dq, wq);
  const Matrix<Real> dxk = kernels::MatMulNN(dk, wk);
  const Matrix<Real> dxv = kernels::MatMulNN(dv, wv);
  for (size_t idx = 0; idx < dx.size(); ++idx) {
    dx.data()[idx] += dxk.data()[idx] + dxv.data()[idx];
    if (residual_) dx.data()[idx] += dy.data()[idx];
  }
  return dx;
}

template <typename Real>
void AttentionBlock<Real>::Append(const std::string &prefix,
                                  std::vector<ParamBlock<Real>> *out) {
  out->push_back(Block(prefix + ".wq", &wq));
  out->push_back(Block(prefix + ".wk", &wk));
  out->push_back(Block(prefix + ".wv", &wv));
  out->push_back(Block(prefix + ".wo", &wo));
}

template void SoftmaxRows(Matrix<float> *);
template void SoftmaxRows(Matrix<double> *);
template struct LinearGrad<float>;
template struct LinearGrad<double>;
template class LinearLayer<float>;
template class LinearLayer<double>;
template struct AttentionGrad<float>;
template struct AttentionGrad<double>;
template class AttentionBlock<float>;
template class AttentionBlock<double>;

}  // namespace sapser
