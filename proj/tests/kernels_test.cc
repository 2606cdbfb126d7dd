// tests/kernels_test.cc

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

#include <omp.h>

#include <cmath>

#include "doctest.h"
#include "sapser/kernels.h"
#include "sapser/rng.h"
#include "test_util.h"

using namespace sapser;
using sapser::testing::CodeOf;

namespace {

template <typename Real>
Matrix<Real> Random(size_t r, size_t c, Rng *rng) {
  Matrix<Real> m(r, c);
  for (Real &v : m.flat()) v = static_cast<Real>(rng->Normal());
  return m;
}

template <typename Real>
Matrix<Real> Transpose(const Matrix<Real> &a) {
  Matrix<Real> t(a.cols(), a.rows());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// Textbook triple loop in long double.
template <typename Real>
Matrix<long double> Naive(const Matrix<Real> &a, const Matrix<Real> &b) {
  Matrix<long double> c(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

template <typename Real>
void RequireClose(const Matrix<Real> &got, const Matrix<long double> &want, double tol) {
  REQUIRE(got.rows() == want.rows());
  REQUIRE(got.cols() == want.cols());
  for (size_t i = 0; i < got.size(); ++i)
    REQUIRE(std::abs(static_cast<long double>(got.flat()[i]) - want.flat()[i]) <= tol);
}

}  // namespace

TEST_CASE_TEMPLATE("matrix products match a naive oracle", Real, float, double) {
  Rng rng(1);
  const double tol = sizeof(Real) == 4 ? 1e-3 : 1e-10;
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 1 + rng.Index(70), k = 1 + rng.Index(70), m = 1 + rng.Index(70);
    const auto a = Random<Real>(n, k, &rng);
    const auto b = Random<Real>(k, m, &rng);
    const auto want = Naive(a, b);
    RequireClose(kernels::MatMulNN(a, b), want, tol);
    RequireClose(kernels::MatMulNT(a, Transpose(b)), want, tol);
    RequireClose(kernels::MatMulTN(Transpose(a), b), want, tol);
  }
}

TEST_CASE_TEMPLATE("parallel kernels are bitwise equal to serial ones", Real, float, double) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  Rng rng(2);
  for (size_t n : {3, 64, 200}) {
    const auto a = Random<Real>(n, 150, &rng);
    const auto b = Random<Real>(150, n, &rng);
    const auto bt = Transpose(b);
    CHECK(kernels::MatMulNN(a, b) == kernels::serial::MatMulNN(a, b));
    CHECK(kernels::MatMulNT(a, bt) == kernels::serial::MatMulNT(a, bt));
    CHECK(kernels::MatMulTN(bt, bt) == kernels::serial::MatMulTN(bt, bt));
    CHECK(kernels::ColumnMean(a) == kernels::serial::ColumnMean(a));
  }
  omp_set_num_threads(saved);
}

TEST_CASE("column mean matches compensated summation") {
  Rng rng(3);
  const auto a = Random<double>(100, 7, &rng);
  const auto mean = kernels::ColumnMean(a);
  for (size_t j = 0; j < 7; ++j) {
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < 100; ++i) {
      const double y = a(i, j) - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    CHECK(std::abs(mean[j] - sum / 100.0) <= 1e-12);
  }
}

TEST_CASE("kernel shape checks") {
  Matrix<double> a(2, 3), b(4, 5);
  CHECK(CodeOf([&] { kernels::MatMulNN(a, b); }) == ErrorCode::kShapeMismatch);
  CHECK(CodeOf([&] { kernels::MatMulNT(a, b); }) == ErrorCode::kShapeMismatch);
  CHECK(CodeOf([&] { kernels::MatMulTN(a, b); }) == ErrorCode::kShapeMismatch);
  CHECK(CodeOf([&] { kernels::ColumnMean(Matrix<double>(0, 3)); }) == ErrorCode::kEmptyMatrix);
  CHECK(CodeOf([] { Matrix<float>(2, 2, {1, 2, 3}); }) == ErrorCode::kShapeMismatch);
}
