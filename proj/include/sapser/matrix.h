// include/sapser/matrix.h

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

#ifndef SAPSER_MATRIX_H_
#define SAPSER_MATRIX_H_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sapser/error.h"

namespace sapser {

// Dense row-major matrix. Vectors are carried as std::vector<Real>.
template <typename Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(size_t rows, size_t cols, std::vector<Real> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      Fail(ErrorCode::kShapeMismatch, "matrix data size does not match shape");
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real &operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
  Real operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

  std::span<Real> row(size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const Real> row(size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  Real *data() { return data_.data(); }
  const Real *data() const { return data_.data(); }
  std::span<Real> flat() { return data_; }
  std::span<const Real> flat() const { return data_; }

  void SetZero() { std::fill(data_.begin(), data_.end(), Real(0)); }

  template <typename Other>
  Matrix<Other> Cast() const {
    Matrix<Other> out(rows_, cols_);
    for (size_t k = 0; k < data_.size(); ++k)
      out.data()[k] = static_cast<Other>(data_[k]);
    return out;
  }

  bool operator==(const Matrix &other) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<Real> data_;
};

template <typename Real>
void CheckShape(const Matrix<Real> &m, size_t rows, size_t cols,
                const char *what) {
  if (m.rows() != rows || m.cols() != cols)
    Fail(ErrorCode::kShapeMismatch,
         std::string(what) + ": expected " + std::to_string(rows) + "x" +
             std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
             std::to_string(m.cols()));
}

}  // namespace sapser

#endif  // SAPSER_MATRIX_H_
