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

#ifndef HMGREC_ENCODERS_H_
#define HMGREC_ENCODERS_H_

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hmgrec/autodiff.h"
#include "hmgrec/hyper_meta_graph.h"
#include "hmgrec/parameters.h"

namespace hmgrec {

enum class EncoderKind { kSG, kGCN, kGIN, kTAG };
enum class ReadoutKind { kMean, kSum };

std::string_view EncoderKindName(EncoderKind kind);
std::optional<EncoderKind> ParseEncoderKind(std::string_view name);
std::string_view ReadoutKindName(ReadoutKind kind);
std::optional<ReadoutKind> ParseReadoutKind(std::string_view name);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kTAG;
  int layers = 3;
  size_t hidden = 16;
  int tag_hops = 2;
  double gin_epsilon = 0.0;
  bool gin_learn_epsilon = false;
  ReadoutKind readout = ReadoutKind::kMean;

  // Throws std::invalid_argument on non-positive sizes.
  void Validate() const;
};

// One graph encoder g_t. Layer rules, with Â the normalized adjacency and A
// the raw adjacency:
//   SG:  H = Â^L X W
//   GCN: H' = relu(Â H W_k)
//   GIN: H' = MLP_k((1 + eps) H + A H),  MLP = relu(. W1 + b1) W2 + b2
//   TAG: H' = relu(sum_{p=0..K} Â^p H W_{k,p})
class GraphEncoder {
 public:
  GraphEncoder(std::string prefix, const EncoderConfig &config, ParameterStore &params,
               std::mt19937_64 &rng);

  // Node representations, n x hidden. `features` is n x hidden.
  ad::Var Encode(const EncoderInput &input, const ad::Var &features) const;
  // Graph embedding, 1 x hidden.
  ad::Var Readout(const ad::Var &nodes) const;
  ad::Var Embed(const EncoderInput &input, const ad::Var &features) const {
    return Readout(Encode(input, features));
  }

  const EncoderConfig &config() const { return config_; }
  const std::string &prefix() const { return prefix_; }
  // Every trainable tensor of this encoder, in registration order.
  const std::vector<ad::Var> &parameters() const { return parameters_; }

 private:
  ad::Var Register(ParameterStore &params, const std::string &name, size_t rows, size_t cols,
                   std::mt19937_64 &rng);

  std::string prefix_;
  EncoderConfig config_;
  std::vector<ad::Var> parameters_;
  // Flattened per-layer weights; layout depends on the kind.
  std::vector<ad::Var> weights_;
  std::vector<ad::Var> biases_;
  std::vector<ad::Var> epsilons_;
};

// levels independently initialised encoders sharing one architecture,
// named enc0, enc1, ...
std::vector<std::shared_ptr<const GraphEncoder>> MakeLevelEncoders(size_t levels,
                                                                   const EncoderConfig &config,
                                                                   ParameterStore &params,
                                                                   std::mt19937_64 &rng);

}  // namespace hmgrec

#endif  // HMGREC_ENCODERS_H_
