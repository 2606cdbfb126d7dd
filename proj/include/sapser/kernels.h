// include/sapser/kernels.h

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

#ifndef SAPSER_KERNELS_H_
#define SAPSER_KERNELS_H_

// Dense kernels used by the neural layers. Every kernel has an OpenMP
// version (namespace kernels) and a straight serial reference
// (namespace kernels::serial). Both accumulate each output element in the
// same order, so their results are bitwise identical; the serial versions
// stay around for tests and for the benchmark.

#include <span>
#include <vector>

#include "sapser/matrix.h"

namespace sapser {
namespace kernels {

// C = A * B^T, with A n x k and B m x k.
template <typename Real>
Matrix<Real> MatMulNT(const Matrix<Real> &a, const Matrix<Real> &b);

// C = A * B, with A n x k and B k x m.
template <typename Real>
Matrix<Real> MatMulNN(const Matrix<Real> &a, const Matrix<Real> &b);

// C = A^T * B, with A k x n and B k x m.
template <typename Real>
Matrix<Real> MatMulTN(const Matrix<Real> &a, const Matrix<Real> &b);

// Mean over rows; out has a.cols() entries.
template <typename Real>
std::vector<Real> ColumnMean(const Matrix<Real> &a);

namespace serial {

template <typename Real>
Matrix<Real> MatMulNT(const Matrix<Real> &a, const Matrix<Real> &b);
template <typename Real>
Matrix<Real> MatMulNN(const Matrix<Real> &a, const Matrix<Real> &b);
template <typename Real>
Matrix<Real> MatMulTN(const Matrix<Real> &a, const Matrix<Real> &b);
template <typename Real>
std::vector<Real> ColumnMean(const Matrix<Real> &a);

}  // namespace serial

// Below this many multiply-adds the OpenMP kernels stay on one thread.
inline constexpr size_t kParallelWorkThreshold = 1 << 15;

}  // namespace kernels
}  // namespace sapser

#endif  // SAPSER_KERNELS_H_
