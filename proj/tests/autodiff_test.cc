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

#include "hmgrec/autodiff.h"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "hmgrec/parameters.h"

namespace hmgrec::ad {
namespace {

Tensor RandomTensor(size_t rows, size_t cols, std::mt19937_64 &rng, double lo = -1.0,
                    double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(rows, cols);
  for (double &v : t.values()) v = u(rng);
  return t;
}

// Checks d loss / d x for every input against central differences.
void ExpectGradientsMatch(std::vector<Var> inputs, const std::function<Var()> &loss,
                          double tol = 1e-5) {
  for (Var &x : inputs) x.ZeroGrad();
  Backward(loss());
  for (Var &x : inputs) {
    const Tensor analytic = x.grad();
    const Tensor numeric = FiniteDifferenceGradient(
        [&] {
          NoGradGuard guard;
          return loss().value().item();
        },
        x.mutable_value());
    EXPECT_LE(RelativeError(analytic, numeric), tol) << x.name();
  }
}

TEST(AutodiffTest, SquareAtThree) {
  Var x = Parameter(Tensor::Scalar(3.0), "x");
  Backward(Mul(x, x));
  EXPECT_DOUBLE_EQ(x.grad().item(), 6.0);
}

TEST(AutodiffTest, SigmoidAtZero) {
  Var x = Parameter(Tensor::Scalar(0.0), "x");
  Var y = Sigmoid(x);
  EXPECT_DOUBLE_EQ(y.value().item(), 0.5);
  Backward(y);
  EXPECT_DOUBLE_EQ(x.grad().item(), 0.25);
}

TEST(AutodiffTest, BackwardRequiresScalar) {
  Var x = Parameter(Tensor(2, 1, 1.0));
  EXPECT_THROW(Backward(x), ShapeError);
}

TEST(AutodiffTest, SharedSubexpressionAccumulates) {
  Var x = Parameter(Tensor::Scalar(2.0));
  Var y = Mul(x, x);
  Backward(Add(y, y));  // 2x^2
  EXPECT_DOUBLE_EQ(x.grad().item(), 8.0);
}

TEST(AutodiffTest, NoGradGuardStopsRecording) {
  Var x = Parameter(Tensor::Scalar(1.0));
  {
    NoGradGuard guard;
    EXPECT_FALSE(GradEnabled());
    EXPECT_FALSE(Mul(x, x).requires_grad());
  }
  EXPECT_TRUE(GradEnabled());
  EXPECT_TRUE(Mul(x, x).requires_grad());
}

TEST(AutodiffTest, NonFiniteForwardThrows) {
  Var x = Parameter(Tensor::Scalar(-1.0));
  EXPECT_THROW(Log(x), NonFiniteError);
}

TEST(AutodiffTest, ElementwiseOpsGradcheck) {
  std::mt19937_64 rng(1);
  Var a = Parameter(RandomTensor(3, 4, rng), "a");
  Var b = Parameter(RandomTensor(3, 4, rng, 0.5, 2.0), "b");
  ExpectGradientsMatch({a, b}, [&] {
    Var t = Add(Mul(Tanh(a), Log(b)), Sub(Exp(Scale(a, 0.5)), Sigmoid(b)));
    return SumAll(Mul(t, t));
  });
}

TEST(AutodiffTest, ReluGradcheckAwayFromKink) {
  std::mt19937_64 rng(2);
  Tensor v = RandomTensor(4, 3, rng);
  for (double &x : v.values()) x += x > 0 ? 0.1 : -0.1;
  Var a = Parameter(v, "a");
  ExpectGradientsMatch({a}, [&] { return SumAll(Mul(Relu(a), a)); });
}

TEST(AutodiffTest, MatrixOpsGradcheck) {
  std::mt19937_64 rng(3);
  Var a = Parameter(RandomTensor(3, 4, rng), "a");
  Var b = Parameter(RandomTensor(4, 2, rng), "b");
  Var row = Parameter(RandomTensor(1, 2, rng), "row");
  Var s = Parameter(RandomTensor(1, 1, rng), "s");
  ExpectGradientsMatch({a, b, row, s}, [&] {
    Var h = AddRow(MatMul(a, b), row);
    Var t = Transpose(ScaleBy(h, s));
    return SumAll(Mul(SoftmaxRows(t), t));
  });
}

TEST(AutodiffTest, ReductionsAndConcatGradcheck) {
  std::mt19937_64 rng(4);
  Var a = Parameter(RandomTensor(3, 2, rng), "a");
  Var b = Parameter(RandomTensor(3, 3, rng), "b");
  Var c = Parameter(RandomTensor(2, 5, rng), "c");
  ExpectGradientsMatch({a, b, c}, [&] {
    const std::vector<Var> cols{a, b};
    Var wide = ConcatCols(cols);  // 3 x 5
    const std::vector<Var> rows{wide, c};
    Var tall = ConcatRows(rows);  // 5 x 5
    Var m = MeanRows(tall);
    Var s = SumRows(Tanh(tall));
    return Add(Dot(m, s), SumAll(LogSumExpRows(tall)));
  });
}

TEST(AutodiffTest, SpMMAndGatherGradcheck) {
  std::mt19937_64 rng(5);
  auto m = std::make_shared<const SparseMatrix>(
      3, 3, std::vector<SparseMatrix::Entry>{{0, 0, 0.5}, {0, 1, 0.25}, {1, 2, -1.0}, {2, 0, 2.0}});
  Var t0 = Parameter(RandomTensor(2, 3, rng), "t0");
  Var t1 = Parameter(RandomTensor(4, 3, rng), "t1");
  const std::vector<Var> tables{t0, t1};
  const std::vector<RowRef> refs{{0, 1}, {1, 3}, {0, 1}};
  ExpectGradientsMatch({t0, t1}, [&] {
    Var x = GatherRows(tables, refs);
    Var y = SpMM(m, x);
    return SumAll(Mul(y, Tanh(x)));
  });
}

TEST(AutodiffTest, BinaryCrossEntropyGradcheck) {
  std::mt19937_64 rng(6);
  Var logits = Parameter(RandomTensor(1, 5, rng), "logits");
  const std::vector<double> labels{1, 0, 0, 1, 0};
  ExpectGradientsMatch({logits}, [&] { return BinaryCrossEntropy(Sigmoid(logits), labels); });
}

TEST(AutodiffTest, BinaryCrossEntropyHalfIsLn2) {
  Var p = Constant(Tensor::Scalar(0.5));
  const std::vector<double> label{1.0};
  EXPECT_NEAR(BinaryCrossEntropy(p, label).value().item(), std::log(2.0), 1e-15);
}

TEST(AutodiffTest, BinaryCrossEntropyClampsExtremes) {
  Var p = Constant(Tensor::FromRows({{0.0, 1.0}}));
  const std::vector<double> labels{1.0, 0.0};
  const double loss = BinaryCrossEntropy(p, labels).value().item();
  EXPECT_TRUE(std::isfinite(loss));
  // 1 - (1 - 1e-12) is not exact in binary, so compare loosely.
  EXPECT_NEAR(loss, -std::log(1e-12), 1e-3);
}

TEST(AutodiffTest, LogSumExpStableForLargeInputs) {
  Var a = Constant(Tensor::FromRows({{700.0, 699.0}}));
  EXPECT_NEAR(LogSumExpRows(a).value().item(), 700.0 + std::log1p(std::exp(-1.0)), 1e-9);
}

TEST(AutodiffTest, RandomThreeLayerCompositionGradcheck) {
  std::mt19937_64 rng(7);
  Var x = Constant(RandomTensor(5, 4, rng));
  Var w1 = Parameter(RandomTensor(4, 4, rng), "w1");
  Var w2 = Parameter(RandomTensor(4, 4, rng), "w2");
  Var w3 = Parameter(RandomTensor(4, 1, rng), "w3");
  ExpectGradientsMatch({w1, w2, w3}, [&] {
    Var h = Tanh(MatMul(x, w1));
    h = Sigmoid(MatMul(h, w2));
    return SumAll(MatMul(h, w3));
  });
}

TEST(AutodiffTest, BackwardIsLinearInTheLoss) {
  std::mt19937_64 rng(8);
  Var w = Parameter(RandomTensor(3, 3, rng), "w");
  auto f = [&] { return SumAll(Tanh(w)); };
  auto g = [&] { return SumAll(Mul(w, w)); };
  w.ZeroGrad();
  Backward(f());
  const Tensor df = w.grad();
  w.ZeroGrad();
  Backward(g());
  const Tensor dg = w.grad();
  w.ZeroGrad();
  Backward(Add(Scale(f(), 2.5), Scale(g(), -0.75)));
  const Tensor combined = w.grad();
  for (size_t i = 0; i < combined.size(); ++i)
    EXPECT_NEAR(combined[i], 2.5 * df[i] - 0.75 * dg[i], 1e-12);
}

TEST(AutodiffTest, DeterministicAcrossRuns) {
  auto run = [] {
    std::mt19937_64 rng(9);
    Var w = Parameter(RandomTensor(4, 4, rng), "w");
    Var loss = SumAll(SoftmaxRows(MatMul(w, Tanh(w))));
    Backward(loss);
    return std::make_pair(loss.value(), w.grad());
  };
  EXPECT_EQ(run(), run());
}

TEST(AutodiffTest, DeepChainDoesNotOverflowStack) {
  Var x = Parameter(Tensor::Scalar(1.0));
  Var y = x;
  for (int i = 0; i < 100000; ++i) y = Scale(y, 1.0);
  Backward(y);
  EXPECT_DOUBLE_EQ(x.grad().item(), 1.0);
}

}  // namespace
}  // namespace hmgrec::ad
