// Copyright 2026 The hmgrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HMGREC_TENSOR_H_
#define HMGREC_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmgrec {

// Raised on incompatible operand shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a computation produces NaN or infinity.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles. Vectors are 1 x n rows.
class Tensor {
 public:
  Tensor() = default;
  Tensor(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor(size_t rows, size_t cols, std::vector<double> values);

  // Builds a tensor from nested rows; all rows must have equal length.
  static Tensor FromRows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor Row(std::span<const double> values);
  static Tensor Identity(size_t n);
  static Tensor Scalar(double v) { return Tensor(1, 1, v); }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  std::vector<size_t> shape() const { return {rows_, cols_}; }
  bool SameShape(const Tensor &other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

  double &operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  double &operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(size_t r) const { return {data_.data() + r * cols_, cols_}; }

  // Value of a 1 x 1 tensor.
  double item() const;

  void Fill(double v);
  bool AllFinite() const;
  // Throws NonFiniteError naming `what` if any entry is NaN or infinite.
  void CheckFinite(const std::string &what) const;

  Tensor Transposed() const;
  double Norm() const;

  bool operator==(const Tensor &other) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

std::string ShapeString(const Tensor &t);

// out = a * b (+ out when accumulate is set). Transpose flags apply to the
// operands before multiplication.
void MatMulInto(const Tensor &a, bool transpose_a, const Tensor &b, bool transpose_b, Tensor *out,
                bool accumulate);
Tensor MatMul(const Tensor &a, const Tensor &b);

// Compressed sparse row matrix. Used for graph adjacency, never trained.
class SparseMatrix {
 public:
  struct Entry {
    size_t row;
    size_t col;
    double value;
  };

  SparseMatrix() = default;
  // Entries with duplicate coordinates are summed.
  SparseMatrix(size_t rows, size_t cols, std::vector<Entry> entries);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t nnz() const { return values_.size(); }

  // out = this * x, or this^T * x when transpose is set. Accumulates into out.
  void MultiplyInto(const Tensor &x, bool transpose, Tensor *out) const;
  Tensor Multiply(const Tensor &x) const;
  Tensor ToDense() const;
  SparseMatrix Transposed() const;

  std::span<const size_t> row_offsets() const { return row_offsets_; }
  std::span<const size_t> col_indices() const { return col_indices_; }
  std::span<const double> nonzeros() const { return values_; }

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<size_t> row_offsets_{0};
  std::vector<size_t> col_indices_;
  std::vector<double> values_;
};

}  // namespace hmgrec

#endif  // HMGREC_TENSOR_H_
