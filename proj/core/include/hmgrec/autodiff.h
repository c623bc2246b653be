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

#ifndef HMGREC_AUTODIFF_H_
#define HMGREC_AUTODIFF_H_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hmgrec/tensor.h"

namespace hmgrec::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// A vertex of the expression graph. Leaves are constants or parameters;
// interior nodes carry a closure that pushes their gradient to the inputs.
struct Node {
  Tensor value;
  Tensor grad;  // empty until a gradient arrives
  bool requires_grad = false;
  std::vector<NodePtr> inputs;
  std::function<void(Node &)> backward;
  std::string name;

  // Adds g into grad, allocating on first use.
  void Accumulate(const Tensor &g);
  Tensor &MutableGrad();
};

// Handle to a node in the expression graph. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  const Tensor &value() const { return node_->value; }
  Tensor &mutable_value() { return node_->value; }
  // Gradient accumulated by Backward(); zeros if none arrived.
  Tensor grad() const;
  bool requires_grad() const { return node_ && node_->requires_grad; }
  size_t rows() const { return node_->value.rows(); }
  size_t cols() const { return node_->value.cols(); }
  const std::string &name() const { return node_->name; }
  void ZeroGrad() { node_->grad = Tensor(); }

  const NodePtr &node() const { return node_; }
  explicit operator bool() const { return node_ != nullptr; }
  bool SameNode(const Var &other) const { return node_ == other.node_; }

 private:
  NodePtr node_;
};

// Untracked input.
Var Constant(Tensor value);
// Trainable leaf; gradients accumulate across Backward() calls until cleared.
Var Parameter(Tensor value, std::string name = {});

// While alive, newly created ops record no backward closures on this thread.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

 private:
  bool previous_;
};
bool GradEnabled();

// Dense ops. Every op validates shapes and rejects non-finite results.
Var MatMul(const Var &a, const Var &b);
Var Transpose(const Var &a);
Var Add(const Var &a, const Var &b);
Var Sub(const Var &a, const Var &b);
Var Mul(const Var &a, const Var &b);  // elementwise
// Adds a 1 x c row to every row of a.
Var AddRow(const Var &a, const Var &row);
Var Scale(const Var &a, double c);
// Multiplies every entry of a by the 1 x 1 tensor s.
Var ScaleBy(const Var &a, const Var &s);
Var Tanh(const Var &a);
Var Relu(const Var &a);
Var Sigmoid(const Var &a);
Var Exp(const Var &a);
Var Log(const Var &a);
// Concatenates along columns; all inputs need equal row counts.
Var ConcatCols(std::span<const Var> parts);
// Stacks along rows; all inputs need equal column counts.
Var ConcatRows(std::span<const Var> parts);
Var MeanRows(const Var &a);           // n x c -> 1 x c
Var SumRows(const Var &a);            // n x c -> 1 x c
Var SumAll(const Var &a);             // -> 1 x 1
Var Dot(const Var &a, const Var &b);  // equal shapes -> 1 x 1
Var SoftmaxRows(const Var &a);
// Row-wise log(sum(exp(a))) with max subtraction, n x c -> n x 1.
Var LogSumExpRows(const Var &a);
// Constant sparse matrix times a tracked dense matrix.
Var SpMM(std::shared_ptr<const SparseMatrix> m, const Var &x);

struct RowRef {
  size_t table;  // index into the tables span
  size_t row;
};
// Assembles rows drawn from several tables (equal widths) into one matrix.
Var GatherRows(std::span<const Var> tables, std::span<const RowRef> refs);

// Mean binary cross-entropy of probabilities against 0/1 labels. Inputs are
// clamped to [1e-12, 1 - 1e-12] before taking logarithms.
Var BinaryCrossEntropy(const Var &probabilities, std::span<const double> labels);

// Reverse sweep from a 1 x 1 loss. Parameter gradients accumulate.
void Backward(const Var &loss);

}  // namespace hmgrec::ad

#endif  // HMGREC_AUTODIFF_H_
