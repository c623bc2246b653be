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

#include "hmgrec/tensor.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hmgrec {

Tensor::Tensor(size_t rows, size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("tensor value count " + std::to_string(data_.size()) +
                     " does not match shape " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Tensor Tensor::FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  const size_t r = rows.size();
  const size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto &row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

Tensor Tensor::Row(std::span<const double> values) {
  return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::Identity(size_t n) {
  Tensor t(n, n);
  for (size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on " + ShapeString(*this));
  return data_[0];
}

void Tensor::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::CheckFinite(const std::string &what) const {
  if (!AllFinite()) throw NonFiniteError("non-finite value in " + what);
}

Tensor Tensor::Transposed() const {
  Tensor t(cols_, rows_);
  for (size_t r = 0; r < rows_; ++r)
    for (size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Tensor::Norm() const {
  return std::sqrt(std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0));
}

std::string ShapeString(const Tensor &t) {
  return "[" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + "]";
}

void MatMulInto(const Tensor &a, bool transpose_a, const Tensor &b, bool transpose_b, Tensor *out,
                bool accumulate) {
  const size_t m = transpose_a ? a.cols() : a.rows();
  const size_t k = transpose_a ? a.rows() : a.cols();
  const size_t kb = transpose_b ? b.cols() : b.rows();
  const size_t n = transpose_b ? b.rows() : b.cols();
  if (k != kb) {
    throw ShapeError("matmul " + ShapeString(a) + (transpose_a ? "^T" : "") + " * " +
                     ShapeString(b) + (transpose_b ? "^T" : ""));
  }
  if (!accumulate || out->rows() != m || out->cols() != n) {
    if (accumulate && out->size() != 0) throw ShapeError("matmul accumulator");
    *out = Tensor(m, n);
  }
  // i-p-j loop order keeps the inner loop contiguous for the common cases.
  for (size_t i = 0; i < m; ++i) {
    double *orow = &(*out)(i, 0);
    for (size_t p = 0; p < k; ++p) {
      const double av = transpose_a ? a(p, i) : a(i, p);
      if (av == 0.0) continue;
      if (!transpose_b) {
        const double *brow = b.values().data() + p * b.cols();
        for (size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
      } else {
        for (size_t j = 0; j < n; ++j) orow[j] += av * b(j, p);
      }
    }
  }
}

Tensor MatMul(const Tensor &a, const Tensor &b) {
  Tensor out;
  MatMulInto(a, false, b, false, &out, false);
  return out;
}

SparseMatrix::SparseMatrix(size_t rows, size_t cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols) {
  std::sort(entries.begin(), entries.end(), [](const Entry &x, const Entry &y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  row_offsets_.assign(rows + 1, 0);
  for (size_t i = 0; i < entries.size(); ++i) {
    const Entry &e = entries[i];
    if (e.row >= rows || e.col >= cols) throw ShapeError("sparse entry out of range");
    if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
      values_.back() += e.value;
      continue;
    }
    col_indices_.push_back(e.col);
    values_.push_back(e.value);
    ++row_offsets_[e.row + 1];
  }
  for (size_t r = 1; r <= rows; ++r) row_offsets_[r] += row_offsets_[r - 1];
}

void SparseMatrix::MultiplyInto(const Tensor &x, bool transpose, Tensor *out) const {
  const size_t in_dim = transpose ? rows_ : cols_;
  const size_t out_dim = transpose ? cols_ : rows_;
  if (x.rows() != in_dim) throw ShapeError("sparse multiply shape");
  if (out->rows() != out_dim || out->cols() != x.cols()) *out = Tensor(out_dim, x.cols());
  const size_t c = x.cols();
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const size_t col = col_indices_[k];
      const double v = values_[k];
      const size_t src = transpose ? r : col;
      const size_t dst = transpose ? col : r;
      const double *xrow = x.values().data() + src * x.cols();
      double *orow = &(*out)(dst, 0);
      for (size_t j = 0; j < c; ++j) orow[j] += v * xrow[j];
    }
  }
}

Tensor SparseMatrix::Multiply(const Tensor &x) const {
  Tensor out(rows_, x.cols());
  MultiplyInto(x, false, &out);
  return out;
}

Tensor SparseMatrix::ToDense() const {
  Tensor d(rows_, cols_);
  for (size_t r = 0; r < rows_; ++r)
    for (size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      d(r, col_indices_[k]) += values_[k];
  return d;
}

SparseMatrix SparseMatrix::Transposed() const {
  std::vector<Entry> entries;
  entries.reserve(nnz());
  for (size_t r = 0; r < rows_; ++r)
    for (size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      entries.push_back({col_indices_[k], r, values_[k]});
  return SparseMatrix(cols_, rows_, std::move(entries));
}

}  // namespace hmgrec
