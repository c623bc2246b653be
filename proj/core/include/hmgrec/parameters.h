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

#ifndef HMGREC_PARAMETERS_H_
#define HMGREC_PARAMETERS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hmgrec/autodiff.h"

namespace hmgrec {

// Named, ordered collection of trainable tensors.
class ParameterStore {
 public:
  // Registers a parameter initialised uniformly in [-1/sqrt(fan), 1/sqrt(fan)].
  ad::Var AddUniform(const std::string &name, size_t rows, size_t cols, size_t fan,
                     std::mt19937_64 &rng);
  ad::Var Add(const std::string &name, Tensor value);

  const ad::Var &Get(const std::string &name) const;
  bool Contains(const std::string &name) const { return index_.count(name) > 0; }
  const std::vector<std::string> &names() const { return names_; }
  size_t size() const { return names_.size(); }
  size_t ScalarCount() const;

  void ZeroGrad();
  bool AllFinite() const;

 private:
  std::vector<std::string> names_;
  std::vector<ad::Var> vars_;
  std::map<std::string, size_t> index_;
};

struct AdamConfig {
  double lr = 1e-4;
  double weight_decay = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Tensor m;
  Tensor v;
  int64_t step = 0;
};

// One Adam update with decoupled weight decay: the parameter is first shrunk
// by (1 - lr * wd), then moved by the bias-corrected Adam delta.
void AdamStep(Tensor &param, const Tensor &grad, AdamState &state, const AdamConfig &config);

enum class OptimizerKind { kAdam, kSgd };

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, AdamConfig config) : kind_(kind), config_(config) {}

  // Applies one update to every parameter from its accumulated gradient.
  void Step(ParameterStore &params);

  OptimizerKind kind() const { return kind_; }
  const AdamConfig &config() const { return config_; }
  const std::map<std::string, AdamState> &states() const { return states_; }
  std::map<std::string, AdamState> &mutable_states() { return states_; }

 private:
  OptimizerKind kind_;
  AdamConfig config_;
  std::map<std::string, AdamState> states_;
};

// Central differences (f(p + eps e_i) - f(p - eps e_i)) / (2 eps) over every
// coordinate of `values`, which f must read. Values are restored on return.
Tensor FiniteDifferenceGradient(const std::function<double()> &f, Tensor &values,
                                double eps = 1e-5);

// ||a - b|| / max(||a||, ||b||, floor).
double RelativeError(const Tensor &analytic, const Tensor &numeric, double floor = 1e-6);

struct GradCheckResult {
  std::string name;
  double relative_error = 0.0;
  bool passed = false;
};

// Compares Backward() against finite differences for every parameter in the
// store. `loss` must rebuild the expression from the current values.
std::vector<GradCheckResult> GradCheck(ParameterStore &params, const std::function<ad::Var()> &loss,
                                       double tolerance, double eps = 1e-5);

// Versioned parameter checkpoint. `metadata` is an opaque JSON text stored
// alongside the tensors (config snapshot, index tables).
struct Checkpoint {
  std::map<std::string, Tensor> tensors;
  std::string metadata_json = "{}";
};

inline constexpr const char *kCheckpointMagic = "hmgrec-checkpoint";
inline constexpr int kCheckpointVersion = 1;

void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &checkpoint);
Checkpoint LoadCheckpoint(const std::filesystem::path &path);

Checkpoint SnapshotParameters(const ParameterStore &params);
// Overwrites parameter values from a checkpoint; shapes and names must match.
void RestoreParameters(const Checkpoint &checkpoint, ParameterStore &params);

}  // namespace hmgrec

#endif  // HMGREC_PARAMETERS_H_
