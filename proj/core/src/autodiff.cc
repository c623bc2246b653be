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

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace hmgrec::ad {

namespace {

thread_local bool grad_enabled = true;

constexpr double kProbabilityFloor = 1e-12;

// Wraps a freshly computed value in a node. The closure is kept only when
// some input is tracked and recording is enabled.
Var MakeOp(Tensor value, const char *what, std::vector<NodePtr> inputs,
           std::function<void(Node &)> backward) {
  value.CheckFinite(what);
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  bool tracked = false;
  for (const NodePtr &in : inputs) tracked = tracked || in->requires_grad;
  if (tracked && grad_enabled) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
    node->name = what;
  }
  return Var(std::move(node));
}

void RequireSameShape(const Var &a, const Var &b, const char *what) {
  if (!a.value().SameShape(b.value())) {
    throw ShapeError(std::string(what) + ": " + ShapeString(a.value()) + " vs " +
                     ShapeString(b.value()));
  }
}

template <typename F>
Var Unary(const Var &a, const char *what, F forward, std::function<void(Node &)> backward) {
  Tensor out = a.value();
  for (double &v : out.values()) v = forward(v);
  return MakeOp(std::move(out), what, {a.node()}, std::move(backward));
}

}  // namespace

void Node::Accumulate(const Tensor &g) {
  if (grad.size() == 0) {
    grad = g;
    return;
  }
  if (!grad.SameShape(g)) throw ShapeError("gradient shape for " + name);
  auto dst = grad.values();
  auto src = g.values();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor &Node::MutableGrad() {
  if (grad.size() == 0) grad = Tensor(value.rows(), value.cols());
  return grad;
}

Tensor Var::grad() const {
  if (node_->grad.size() == 0) return Tensor(node_->value.rows(), node_->value.cols());
  return node_->grad;
}

Var Constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var Parameter(Tensor value, std::string name) {
  value.CheckFinite("parameter " + name);
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->name = std::move(name);
  return Var(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }
bool GradEnabled() { return grad_enabled; }

Var MatMul(const Var &a, const Var &b) {
  Tensor out;
  MatMulInto(a.value(), false, b.value(), false, &out, false);
  return MakeOp(std::move(out), "matmul", {a.node(), b.node()}, [](Node &z) {
    Node &x = *z.inputs[0];
    Node &y = *z.inputs[1];
    if (x.requires_grad) MatMulInto(z.grad, false, y.value, true, &x.MutableGrad(), true);
    if (y.requires_grad) MatMulInto(x.value, true, z.grad, false, &y.MutableGrad(), true);
  });
}

Var Transpose(const Var &a) {
  return MakeOp(a.value().Transposed(), "transpose", {a.node()},
                [](Node &z) { z.inputs[0]->Accumulate(z.grad.Transposed()); });
}

Var Add(const Var &a, const Var &b) {
  RequireSameShape(a, b, "add");
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return MakeOp(std::move(out), "add", {a.node(), b.node()}, [](Node &z) {
    for (const NodePtr &in : z.inputs)
      if (in->requires_grad) in->Accumulate(z.grad);
  });
}

Var Sub(const Var &a, const Var &b) {
  RequireSameShape(a, b, "sub");
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return MakeOp(std::move(out), "sub", {a.node(), b.node()}, [](Node &z) {
    if (z.inputs[0]->requires_grad) z.inputs[0]->Accumulate(z.grad);
    if (z.inputs[1]->requires_grad) {
      Tensor &g = z.inputs[1]->MutableGrad();
      for (size_t i = 0; i < g.size(); ++i) g[i] -= z.grad[i];
    }
  });
}

Var Mul(const Var &a, const Var &b) {
  RequireSameShape(a, b, "mul");
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return MakeOp(std::move(out), "mul", {a.node(), b.node()}, [](Node &z) {
    Node &x = *z.inputs[0];
    Node &y = *z.inputs[1];
    if (x.requires_grad) {
      Tensor &g = x.MutableGrad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += z.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      Tensor &g = y.MutableGrad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += z.grad[i] * x.value[i];
    }
  });
}

Var AddRow(const Var &a, const Var &row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError("add_row: " + ShapeString(a.value()) + " + " + ShapeString(row.value()));
  }
  Tensor out = a.value();
  for (size_t r = 0; r < out.rows(); ++r)
    for (size_t c = 0; c < out.cols(); ++c) out(r, c) += row.value()[c];
  return MakeOp(std::move(out), "add_row", {a.node(), row.node()}, [](Node &z) {
    if (z.inputs[0]->requires_grad) z.inputs[0]->Accumulate(z.grad);
    if (z.inputs[1]->requires_grad) {
      Tensor &g = z.inputs[1]->MutableGrad();
      for (size_t r = 0; r < z.grad.rows(); ++r)
        for (size_t c = 0; c < z.grad.cols(); ++c) g[c] += z.grad(r, c);
    }
  });
}

Var Scale(const Var &a, double c) {
  Tensor out = a.value();
  for (double &v : out.values()) v *= c;
  return MakeOp(std::move(out), "scale", {a.node()}, [c](Node &z) {
    Tensor &g = z.inputs[0]->MutableGrad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += c * z.grad[i];
  });
}

Var ScaleBy(const Var &a, const Var &s) {
  if (s.value().size() != 1) throw ShapeError("scale_by expects a 1x1 factor");
  const double factor = s.value()[0];
  Tensor out = a.value();
  for (double &v : out.values()) v *= factor;
  return MakeOp(std::move(out), "scale_by", {a.node(), s.node()}, [](Node &z) {
    Node &x = *z.inputs[0];
    Node &f = *z.inputs[1];
    if (x.requires_grad) {
      Tensor &g = x.MutableGrad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += f.value[0] * z.grad[i];
    }
    if (f.requires_grad) {
      double acc = 0.0;
      for (size_t i = 0; i < z.grad.size(); ++i) acc += x.value[i] * z.grad[i];
      f.MutableGrad()[0] += acc;
    }
  });
}

Var Tanh(const Var &a) {
  return Unary(
      a, "tanh", [](double v) { return std::tanh(v); },
      [](Node &z) {
        Tensor &g = z.inputs[0]->MutableGrad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += z.grad[i] * (1.0 - z.value[i] * z.value[i]);
      });
}

Var Relu(const Var &a) {
  return Unary(
      a, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](Node &z) {
        Tensor &g = z.inputs[0]->MutableGrad();
        const Tensor &x = z.inputs[0]->value;
        for (size_t i = 0; i < g.size(); ++i)
          if (x[i] > 0.0) g[i] += z.grad[i];
      });
}

Var Sigmoid(const Var &a) {
  auto forward = [](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  };
  return Unary(a, "sigmoid", forward, [](Node &z) {
    Tensor &g = z.inputs[0]->MutableGrad();
    for (size_t i = 0; i < g.size(); ++i) g[i] += z.grad[i] * z.value[i] * (1.0 - z.value[i]);
  });
}

Var Exp(const Var &a) {
  return Unary(
      a, "exp", [](double v) { return std::exp(v); },
      [](Node &z) {
        Tensor &g = z.inputs[0]->MutableGrad();
        for (size_t i = 0; i < g.size(); ++i) g[i] += z.grad[i] * z.value[i];
      });
}

Var Log(const Var &a) {
  return Unary(
      a, "log", [](double v) { return std::log(v); },
      [](Node &z) {
        Tensor &g = z.inputs[0]->MutableGrad();
        const Tensor &x = z.inputs[0]->value;
        for (size_t i = 0; i < g.size(); ++i) g[i] += z.grad[i] / x[i];
      });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  const size_t rows = parts[0].rows();
  size_t cols = 0;
  for (const Var &p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols row mismatch");
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<NodePtr> inputs;
  size_t offset = 0;
  for (const Var &p : parts) {
    for (size_t r = 0; r < rows; ++r)
      for (size_t c = 0; c < p.cols(); ++c) out(r, offset + c) = p.value()(r, c);
    offset += p.cols();
    inputs.push_back(p.node());
  }
  return MakeOp(std::move(out), "concat_cols", std::move(inputs), [](Node &z) {
    size_t off = 0;
    for (const NodePtr &in : z.inputs) {
      const size_t c = in->value.cols();
      if (in->requires_grad) {
        Tensor &g = in->MutableGrad();
        for (size_t r = 0; r < z.grad.rows(); ++r)
          for (size_t j = 0; j < c; ++j) g(r, j) += z.grad(r, off + j);
      }
      off += c;
    }
  });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  const size_t cols = parts[0].cols();
  size_t rows = 0;
  for (const Var &p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows column mismatch");
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  std::vector<NodePtr> inputs;
  for (const Var &p : parts) {
    data.insert(data.end(), p.value().values().begin(), p.value().values().end());
    inputs.push_back(p.node());
  }
  return MakeOp(Tensor(rows, cols, std::move(data)), "concat_rows", std::move(inputs), [](Node &z) {
    size_t off = 0;
    for (const NodePtr &in : z.inputs) {
      const size_t n = in->value.size();
      if (in->requires_grad) {
        Tensor &g = in->MutableGrad();
        for (size_t i = 0; i < n; ++i) g[i] += z.grad[off + i];
      }
      off += n;
    }
  });
}

Var SumRows(const Var &a) {
  Tensor out(1, a.cols());
  for (size_t r = 0; r < a.rows(); ++r)
    for (size_t c = 0; c < a.cols(); ++c) out[c] += a.value()(r, c);
  return MakeOp(std::move(out), "sum_rows", {a.node()}, [](Node &z) {
    Tensor &g = z.inputs[0]->MutableGrad();
    for (size_t r = 0; r < g.rows(); ++r)
      for (size_t c = 0; c < g.cols(); ++c) g(r, c) += z.grad[c];
  });
}

Var MeanRows(const Var &a) {
  if (a.rows() == 0) throw ShapeError("mean over zero rows");
  const double inv = 1.0 / static_cast<double>(a.rows());
  Tensor out(1, a.cols());
  for (size_t r = 0; r < a.rows(); ++r)
    for (size_t c = 0; c < a.cols(); ++c) out[c] += a.value()(r, c);
  for (double &v : out.values()) v *= inv;
  return MakeOp(std::move(out), "mean_rows", {a.node()}, [inv](Node &z) {
    Tensor &g = z.inputs[0]->MutableGrad();
    for (size_t r = 0; r < g.rows(); ++r)
      for (size_t c = 0; c < g.cols(); ++c) g(r, c) += inv * z.grad[c];
  });
}

Var SumAll(const Var &a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return MakeOp(Tensor::Scalar(s), "sum_all", {a.node()}, [](Node &z) {
    Tensor &g = z.inputs[0]->MutableGrad();
    for (double &v : g.values()) v += z.grad[0];
  });
}

Var Dot(const Var &a, const Var &b) {
  RequireSameShape(a, b, "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.value().size(); ++i) s += a.value()[i] * b.value()[i];
  return MakeOp(Tensor::Scalar(s), "dot", {a.node(), b.node()}, [](Node &z) {
    Node &x = *z.inputs[0];
    Node &y = *z.inputs[1];
    const double dz = z.grad[0];
    if (x.requires_grad) {
      Tensor &g = x.MutableGrad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += dz * y.value[i];
    }
    if (y.requires_grad) {
      Tensor &g = y.MutableGrad();
      for (size_t i = 0; i < g.size(); ++i) g[i] += dz * x.value[i];
    }
  });
}

Var SoftmaxRows(const Var &a) {
  Tensor out = a.value();
  for (size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double &v : row) s += (v = std::exp(v - m));
    for (double &v : row) v /= s;
  }
  return MakeOp(std::move(out), "softmax", {a.node()}, [](Node &z) {
    Tensor &g = z.inputs[0]->MutableGrad();
    for (size_t r = 0; r < z.value.rows(); ++r) {
      double inner = 0.0;
      for (size_t c = 0; c < z.value.cols(); ++c) inner += z.grad(r, c) * z.value(r, c);
      for (size_t c = 0; c < z.value.cols(); ++c) g(r, c) += z.value(r, c) * (z.grad(r, c) - inner);
    }
  });
}

Var LogSumExpRows(const Var &a) {
  if (a.cols() == 0) throw ShapeError("logsumexp over zero columns");
  Tensor out(a.rows(), 1);
  for (size_t r = 0; r < a.rows(); ++r) {
    auto row = a.value().row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - m);
    out[r] = m + std::log(s);
  }
  return MakeOp(std::move(out), "logsumexp", {a.node()}, [](Node &z) {
    Node &x = *z.inputs[0];
    Tensor &g = x.MutableGrad();
    for (size_t r = 0; r < x.value.rows(); ++r)
      for (size_t c = 0; c < x.value.cols(); ++c)
        g(r, c) += z.grad[r] * std::exp(x.value(r, c) - z.value[r]);
  });
}

Var SpMM(std::shared_ptr<const SparseMatrix> m, const Var &x) {
  Tensor out(m->rows(), x.cols());
  m->MultiplyInto(x.value(), false, &out);
  return MakeOp(std::move(out), "spmm", {x.node()},
                [m](Node &z) { m->MultiplyInto(z.grad, true, &z.inputs[0]->MutableGrad()); });
}

Var GatherRows(std::span<const Var> tables, std::span<const RowRef> refs) {
  if (tables.empty()) throw ShapeError("gather from no tables");
  const size_t cols = tables[0].cols();
  for (const Var &t : tables)
    if (t.cols() != cols) throw ShapeError("gather tables differ in width");
  Tensor out(refs.size(), cols);
  for (size_t i = 0; i < refs.size(); ++i) {
    const RowRef &ref = refs[i];
    if (ref.table >= tables.size() || ref.row >= tables[ref.table].rows())
      throw ShapeError("gather row out of range");
    auto src = tables[ref.table].value().row(ref.row);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  std::vector<NodePtr> inputs;
  for (const Var &t : tables) inputs.push_back(t.node());
  std::vector<RowRef> owned(refs.begin(), refs.end());
  return MakeOp(std::move(out), "gather_rows", std::move(inputs),
                [owned = std::move(owned)](Node &z) {
                  for (size_t i = 0; i < owned.size(); ++i) {
                    Node &t = *z.inputs[owned[i].table];
                    if (!t.requires_grad) continue;
                    auto dst = t.MutableGrad().row(owned[i].row);
                    auto src = z.grad.row(i);
                    for (size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                  }
                });
}

Var BinaryCrossEntropy(const Var &probabilities, std::span<const double> labels) {
  const Tensor &p = probabilities.value();
  if (p.size() != labels.size() || p.size() == 0)
    throw ShapeError("bce: predictions and labels differ in length");
  const double inv = 1.0 / static_cast<double>(p.size());
  double loss = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbabilityFloor, 1.0 - kProbabilityFloor);
    loss -= labels[i] * std::log(q) + (1.0 - labels[i]) * std::log(1.0 - q);
  }
  std::vector<double> y(labels.begin(), labels.end());
  return MakeOp(
      Tensor::Scalar(loss * inv), "bce", {probabilities.node()}, [y = std::move(y), inv](Node &z) {
        Node &x = *z.inputs[0];
        Tensor &g = x.MutableGrad();
        for (size_t i = 0; i < g.size(); ++i) {
          const double q = std::clamp(x.value[i], kProbabilityFloor, 1.0 - kProbabilityFloor);
          g[i] += z.grad[0] * inv * (-(y[i] / q) + (1.0 - y[i]) / (1.0 - q));
        }
      });
}

void Backward(const Var &loss) {
  if (loss.value().size() != 1)
    throw ShapeError("backward needs a scalar loss, got " + ShapeString(loss.value()));
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node *> order;
  std::unordered_set<Node *> visited;
  std::vector<std::pair<Node *, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node *child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->Accumulate(Tensor::Scalar(1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node *node = *it;
    if (!node->backward || node->grad.size() == 0) continue;
    node->backward(*node);
    node->grad.CheckFinite("gradient of " + node->name);
    node->grad = Tensor();  // interior gradients are not needed after the sweep
  }
}

}  // namespace hmgrec::ad
