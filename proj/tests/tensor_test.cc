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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace hmgrec {
namespace {

TEST(TensorTest, FromRowsAndIndexing) {
  const Tensor t = Tensor::FromRows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t(1, 2), 6.0);
  EXPECT_EQ(t.Transposed()(2, 1), 6.0);
}

TEST(TensorTest, RaggedRowsRejected) { EXPECT_THROW(Tensor::FromRows({{1, 2}, {3}}), ShapeError); }

TEST(TensorTest, MatMulMatchesHandProduct) {
  const Tensor a = Tensor::FromRows({{1, 2}, {3, 4}});
  const Tensor b = Tensor::FromRows({{5, 6}, {7, 8}});
  EXPECT_EQ(MatMul(a, b), Tensor::FromRows({{19, 22}, {43, 50}}));
  EXPECT_THROW(MatMul(a, Tensor(3, 1)), ShapeError);
}

TEST(TensorTest, MatMulIntoTransposeFlags) {
  const Tensor a = Tensor::FromRows({{1, 2, 3}});
  const Tensor b = Tensor::FromRows({{4, 5, 6}});
  Tensor out(1, 1);
  MatMulInto(a, false, b, true, &out, false);
  EXPECT_EQ(out.item(), 32.0);
  MatMulInto(a, false, b, true, &out, true);
  EXPECT_EQ(out.item(), 64.0);
  Tensor outer(3, 3);
  MatMulInto(a, true, b, false, &outer, false);
  EXPECT_EQ(outer(2, 0), 12.0);
}

TEST(TensorTest, FiniteChecks) {
  Tensor t(2, 2, 1.0);
  EXPECT_TRUE(t.AllFinite());
  t(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.AllFinite());
  EXPECT_THROW(t.CheckFinite("t"), NonFiniteError);
}

TEST(SparseMatrixTest, DuplicatesAreSummed) {
  const SparseMatrix m(2, 2, {{0, 1, 1.0}, {1, 0, 2.0}, {0, 1, 0.5}});
  EXPECT_EQ(m.nnz(), 2u);
  EXPECT_EQ(m.ToDense(), Tensor::FromRows({{0, 1.5}, {2, 0}}));
}

TEST(SparseMatrixTest, MultiplyMatchesDense) {
  const SparseMatrix m(3, 2, {{0, 0, 1.0}, {2, 1, -2.0}, {1, 0, 3.0}});
  const Tensor x = Tensor::FromRows({{1, 2}, {3, 4}});
  EXPECT_EQ(m.Multiply(x), MatMul(m.ToDense(), x));
  const Tensor y = Tensor::FromRows({{1}, {2}, {3}});
  Tensor out(2, 1);
  m.MultiplyInto(y, true, &out);
  EXPECT_EQ(out, MatMul(m.ToDense().Transposed(), y));
  EXPECT_EQ(m.Transposed().ToDense(), m.ToDense().Transposed());
}

TEST(SparseMatrixTest, OutOfRangeEntryRejected) {
  EXPECT_ANY_THROW(SparseMatrix(2, 2, {{2, 0, 1.0}}));
}

}  // namespace
}  // namespace hmgrec
