// src/kernels.cc

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

#include "sapser/kernels.h"

#include <string>

namespace sapser {
namespace kernels {
namespace {

template <typename Real>
void CheckInner(size_t ka, size_t kb, const char *what) {
  if (ka != kb)
    Fail(ErrorCode::kShapeMismatch, std::string(what) + ": inner dimension " +
                                        std::to_string(ka) + " vs " +
                                        std::to_string(kb));
}

// Row kernels shared by the serial and parallel drivers so both compute
// each output element with the same summation order.
template <typename Real>
inline void RowNT(const Matrix<Real> &a, const Matrix<Real> &b, size_t i,
                  Matrix<Real> *c) {
  const size_t k = a.cols();
  const Real *ar = a.data() + i * k;
  Real *cr = c->data() + i * c->cols();
  for (size_t j = 0; j < b.rows(); ++j) {
    const Real *br = b.data() + j * k;
    Real sum = 0;
    for (size_t p = 0; p < k; ++p) sum += ar[p] * br[p];
    cr[j] = sum;
  }
}

template <typename Real>
inline void RowNN(const Matrix<Real> &a, const Matrix<Real> &b, size_t i,
                  Matrix<Real> *c) {
  const size_t k = a.cols(), m = b.cols();
  Real *cr = c->data() + i * m;
  for (size_t p = 0; p < k; ++p) {
    const Real av = a(i, p);
    const Real *br = b.data() + p * m;
    for (size_t j = 0; j < m; ++j) cr[j] += av * br[j];
  }
}

template <typename Real>
inline void RowTN(const Matrix<Real> &a, const Matrix<Real> &b, size_t i,
                  Matrix<Real> *c) {
  const size_t k = a.rows(), m = b.cols();
  Real *cr = c->data() + i * m;
  for (size_t p = 0; p < k; ++p) {
    const Real av = a(p, i);
    const Real *br = b.data() + p * m;
    for (size_t j = 0; j < m; ++j) cr[j] += av * br[j];
  }
}

template <typename Real>
inline void ColumnMeanRange(const Matrix<Real> &a, size_t j0, size_t j1,
                            std::vector<Real> *out) {
  for (size_t j = j0; j < j1; ++j) {
    Real sum = 0;
    for (size_t i = 0; i < a.rows(); ++i) sum += a(i, j);
    (*out)[j] = sum / static_cast<Real>(a.rows());
  }
}

}  // namespace

template <typename Real>
Matrix<Real> MatMulNT(const Matrix<Real> &a, const Matrix<Real> &b) {
  CheckInner<Real>(a.cols(), b.cols(), "MatMulNT");
  Matrix<Real> c(a.rows(), b.rows());
  const long n = static_cast<long>(a.rows());
  const bool par = a.rows() * b.rows() * a.cols() > kParallelWorkThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < n; ++i) RowNT(a, b, static_cast<size_t>(i), &c);
  return c;
}

template <typename Real>
Matrix<Real> MatMulNN(const Matrix<Real> &a, const Matrix<Real> &b) {
  CheckInner<Real>(a.cols(), b.rows(), "MatMulNN");
  Matrix<Real> c(a.rows(), b.cols());
  const long n = static_cast<long>(a.rows());
  const bool par = a.rows() * b.cols() * a.cols() > kParallelWorkThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < n; ++i) RowNN(a, b, static_cast<size_t>(i), &c);
  return c;
}

template <typename Real>
Matrix<Real> MatMulTN(const Matrix<Real> &a, const Matrix<Real> &b) {
  CheckInner<Real>(a.rows(), b.rows(), "MatMulTN");
  Matrix<Real> c(a.cols(), b.cols());
  const long n = static_cast<long>(a.cols());
  const bool par = a.cols() * b.cols() * a.rows() > kParallelWorkThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < n; ++i) RowTN(a, b, static_cast<size_t>(i), &c);
  return c;
}

template <typename Real>
std::vector<Real> ColumnMean(const Matrix<Real> &a) {
  if (a.rows() == 0) Fail(ErrorCode::kEmptyMatrix, "ColumnMean of 0 rows");
  std::vector<Real> out(a.cols());
  const long d = static_cast<long>(a.cols());
  const bool par = a.size() > kParallelWorkThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (long j = 0; j < d; ++j)
    ColumnMeanRange(a, static_cast<size_t>(j), static_cast<size_t>(j) + 1, &out);
  return out;
}

namespace serial {

template <typename Real>
Matrix<Real> MatMulNT(const Matrix<Real> &a, const Matrix<Real> &b) {
  CheckInner<Real>(a.cols(), b.cols(), "MatMulNT");
  Matrix<Real> c(a.rows(), b.rows());
  for (size_t i = 0; i < a.rows(); ++i) RowNT(a, b, i, &c);
  return c;
}

template <typename Real>
Matrix<Real> MatMulNN(const Matrix<Real> &a, const Matrix<Real> &b) {
  CheckInner<Real>(a.cols(), b.rows(), "MatMulNN");
  Matrix<Real> c(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) RowNN(a, b, i, &c);
  return c;
}

template <typename Real>
Matrix<Real> MatMulTN(const Matrix<Real> &a, const Matrix<Real> &b) {
  CheckInner<Real>(a.rows(), b.rows(), "MatMulTN");
  Matrix<Real> c(a.cols(), b.cols());
  for (size_t i = 0; i < a.cols(); ++i) RowTN(a, b, i, &c);
  return c;
}

template <typename Real>
std::vector<Real> ColumnMean(const Matrix<Real> &a) {
  if (a.rows() == 0) Fail(ErrorCode::kEmptyMatrix, "ColumnMean of 0 rows");
  std::vector<Real> out(a.cols());
  ColumnMeanRange(a, 0, a.cols(), &out);
  return out;
}

}  // namespace serial

#define SAPSER_INSTANTIATE_KERNELS(Real)                                    \
  template Matrix<Real> MatMulNT(const Matrix<Real> &, const Matrix<Real> &); \
  template Matrix<Real> MatMulNN(const Matrix<Real> &, const Matrix<Real> &); \
  template Matrix<Real> MatMulTN(const Matrix<Real> &, const Matrix<Real> &); \
  template std::vector<Real> ColumnMean(const Matrix<Real> &);               \
  template Matrix<Real> serial::MatMulNT(const Matrix<Real> &,               \
                                         const Matrix<Real> &);              \
  template Matrix<Real> serial::MatMulNN(const Matrix<Real> &,               \
                                         const Matrix<Real> &);              \
  template Matrix<Real> serial::MatMulTN(const Matrix<Real> &,               \
                                         const Matrix<Real> &);              \
  template std::vector<Real> serial::ColumnMean(const Matrix<Real> &);

SAPSER_INSTANTIATE_KERNELS(float)
SAPSER_INSTANTIATE_KERNELS(double)

}  // namespace kernels
}  // namespace sapser
