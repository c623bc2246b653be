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

#include "hmgrec/parameters.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace hmgrec {

ad::Var ParameterStore::AddUniform(const std::string &name, size_t rows, size_t cols, size_t fan,
                                   std::mt19937_64 &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<size_t>(fan, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (double &v : t.values()) v = dist(rng);
  return Add(name, std::move(t));
}

ad::Var ParameterStore::Add(const std::string &name, Tensor value) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  index_[name] = vars_.size();
  names_.push_back(name);
  vars_.push_back(ad::Parameter(std::move(value), name));
  return vars_.back();
}

const ad::Var &ParameterStore::Get(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + name);
  return vars_[it->second];
}

size_t ParameterStore::ScalarCount() const {
  size_t n = 0;
  for (const ad::Var &v : vars_) n += v.value().size();
  return n;
}

void ParameterStore::ZeroGrad() {
  for (ad::Var &v : vars_) v.ZeroGrad();
}

bool ParameterStore::AllFinite() const {
  return std::all_of(vars_.begin(), vars_.end(),
                     [](const ad::Var &v) { return v.value().AllFinite(); });
}

void AdamStep(Tensor &param, const Tensor &grad, AdamState &state, const AdamConfig &config) {
  if (!param.SameShape(grad)) throw ShapeError("adam: gradient shape mismatch");
  if (state.m.size() == 0) {
    state.m = Tensor(param.rows(), param.cols());
    state.v = Tensor(param.rows(), param.cols());
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - config.lr * config.weight_decay;
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    param[i] = param[i] * decay - config.lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void Optimizer::Step(ParameterStore &params) {
  for (const std::string &name : params.names()) {
    ad::Var var = params.Get(name);
    Tensor &value = var.mutable_value();
    const Tensor grad = var.grad();
    if (kind_ == OptimizerKind::kAdam) {
      AdamStep(value, grad, states_[name], config_);
    } else {
      const double decay = 1.0 - config_.lr * config_.weight_decay;
      for (size_t i = 0; i < value.size(); ++i) value[i] = value[i] * decay - config_.lr * grad[i];
    }
    value.CheckFinite("parameter " + name + " after update");
  }
}

Tensor FiniteDifferenceGradient(const std::function<double()> &f, Tensor &values, double eps) {
  Tensor grad(values.rows(), values.cols());
  for (size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = f();
    values[i] = saved - eps;
    const double down = f();
    values[i] = saved;
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

double RelativeError(const Tensor &analytic, const Tensor &numeric, double floor) {
  if (!analytic.SameShape(numeric)) throw ShapeError("relative error shape mismatch");
  double diff = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    diff += d * d;
  }
  const double scale = std::max({analytic.Norm(), numeric.Norm(), floor});
  return std::sqrt(diff) / scale;
}

std::vector<GradCheckResult> GradCheck(ParameterStore &params, const std::function<ad::Var()> &loss,
                                       double tolerance, double eps) {
  params.ZeroGrad();
  ad::Backward(loss());
  std::vector<Tensor> analytic;
  for (const std::string &name : params.names()) analytic.push_back(params.Get(name).grad());
  params.ZeroGrad();

  auto value_only = [&loss] {
    ad::NoGradGuard guard;
    return loss().value().item();
  };
  std::vector<GradCheckResult> results;
  for (size_t k = 0; k < params.names().size(); ++k) {
    const std::string &name = params.names()[k];
    ad::Var var = params.Get(name);
    const Tensor numeric = FiniteDifferenceGradient(value_only, var.mutable_value(), eps);
    GradCheckResult r;
    r.name = name;
    r.relative_error = RelativeError(analytic[k], numeric);
    r.passed = r.relative_error <= tolerance;
    results.push_back(r);
  }
  return results;
}

void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &checkpoint) {
  nlohmann::ordered_json doc;
  doc["magic"] = kCheckpointMagic;
  doc["version"] = kCheckpointVersion;
  doc["metadata"] = nlohmann::ordered_json::parse(checkpoint.metadata_json);
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  for (const auto &[name, t] : checkpoint.tensors) {
    tensors[name] = {{"shape", t.shape()},
                     {"values", std::vector<double>(t.values().begin(), t.values().end())}};
  }
  doc["tensors"] = std::move(tensors);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("magic", "") != kCheckpointMagic)
    throw std::runtime_error("not a checkpoint file: " + path.string());
  if (doc.value("version", 0) != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path.string());
  Checkpoint cp;
  cp.metadata_json = doc.at("metadata").dump();
  for (const auto &[name, entry] : doc.at("tensors").items()) {
    const auto shape = entry.at("shape").get<std::vector<size_t>>();
    if (shape.size() != 2) throw std::runtime_error("bad tensor shape for " + name);
    cp.tensors.emplace(name,
                       Tensor(shape[0], shape[1], entry.at("values").get<std::vector<double>>()));
  }
  return cp;
}

Checkpoint SnapshotParameters(const ParameterStore &params) {
  Checkpoint cp;
  for (const std::string &name : params.names()) cp.tensors[name] = params.Get(name).value();
  return cp;
}

void RestoreParameters(const Checkpoint &checkpoint, ParameterStore &params) {
  for (const std::string &name : params.names()) {
    auto it = checkpoint.tensors.find(name);
    if (it == checkpoint.tensors.end())
      throw std::runtime_error("checkpoint lacks parameter " + name);
    ad::Var var = params.Get(name);
    if (!it->second.SameShape(var.value()))
      throw std::runtime_error("checkpoint shape mismatch for " + name);
    var.mutable_value() = it->second;
  }
}

}  // namespace hmgrec
