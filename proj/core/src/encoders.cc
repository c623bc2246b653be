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

#include "hmgrec/encoders.h"

#include <stdexcept>

namespace hmgrec {

std::string_view EncoderKindName(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kSG:
      return "sg";
    case EncoderKind::kGCN:
      return "gcn";
    case EncoderKind::kGIN:
      return "gin";
    case EncoderKind::kTAG:
      return "tag";
  }
  return "?";
}

std::optional<EncoderKind> ParseEncoderKind(std::string_view name) {
  for (EncoderKind k : {EncoderKind::kSG, EncoderKind::kGCN, EncoderKind::kGIN, EncoderKind::kTAG})
    if (EncoderKindName(k) == name) return k;
  return std::nullopt;
}

std::string_view ReadoutKindName(ReadoutKind kind) {
  return kind == ReadoutKind::kMean ? "mean" : "sum";
}

std::optional<ReadoutKind> ParseReadoutKind(std::string_view name) {
  if (name == "mean") return ReadoutKind::kMean;
  if (name == "sum") return ReadoutKind::kSum;
  return std::nullopt;
}

void EncoderConfig::Validate() const {
  if (layers < 1) throw std::invalid_argument("encoder layers must be >= 1");
  if (hidden < 1) throw std::invalid_argument("hidden dimension must be >= 1");
  if (tag_hops < 0) throw std::invalid_argument("tag_hops must be >= 0");
}

GraphEncoder::GraphEncoder(std::string prefix, const EncoderConfig &config, ParameterStore &params,
                           std::mt19937_64 &rng)
    : prefix_(std::move(prefix)), config_(config) {
  config_.Validate();
  const size_t h = config_.hidden;
  const std::string kind(EncoderKindName(config_.kind));
  switch (config_.kind) {
    case EncoderKind::kSG:
      weights_.push_back(Register(params, "w", h, h, rng));
      break;
    case EncoderKind::kGCN:
      for (int k = 0; k < config_.layers; ++k)
        weights_.push_back(Register(params, "w" + std::to_string(k), h, h, rng));
      break;
    case EncoderKind::kGIN:
      for (int k = 0; k < config_.layers; ++k) {
        const std::string layer = std::to_string(k);
        weights_.push_back(Register(params, "mlp" + layer + ".w1", h, h, rng));
        biases_.push_back(params.Add(prefix_ + "." + kind + ".mlp" + layer + ".b1", Tensor(1, h)));
        parameters_.push_back(biases_.back());
        weights_.push_back(Register(params, "mlp" + layer + ".w2", h, h, rng));
        biases_.push_back(params.Add(prefix_ + "." + kind + ".mlp" + layer + ".b2", Tensor(1, h)));
        parameters_.push_back(biases_.back());
        if (config_.gin_learn_epsilon) {
          epsilons_.push_back(params.Add(prefix_ + "." + kind + ".eps" + layer,
                                         Tensor::Scalar(config_.gin_epsilon)));
          parameters_.push_back(epsilons_.back());
        }
      }
      break;
    case EncoderKind::kTAG:
      for (int k = 0; k < config_.layers; ++k)
        for (int p = 0; p <= config_.tag_hops; ++p)
          weights_.push_back(
              Register(params, "w" + std::to_string(k) + ".hop" + std::to_string(p), h, h, rng));
      break;
  }
}

ad::Var GraphEncoder::Register(ParameterStore &params, const std::string &name, size_t rows,
                               size_t cols, std::mt19937_64 &rng) {
  ad::Var v =
      params.AddUniform(prefix_ + "." + std::string(EncoderKindName(config_.kind)) + "." + name,
                        rows, cols, rows, rng);
  parameters_.push_back(v);
  return v;
}

ad::Var GraphEncoder::Encode(const EncoderInput &input, const ad::Var &features) const {
  if (features.rows() != input.num_nodes() || features.cols() != config_.hidden) {
    throw ShapeError("encoder features " + ShapeString(features.value()) + " for " +
                     std::to_string(input.num_nodes()) + " nodes, hidden " +
                     std::to_string(config_.hidden));
  }
  const auto &norm = input.normalized_adjacency;
  ad::Var h = features;
  switch (config_.kind) {
    case EncoderKind::kSG:
      for (int k = 0; k < config_.layers; ++k) h = ad::SpMM(norm, h);
      return ad::MatMul(h, weights_[0]);
    case EncoderKind::kGCN:
      for (int k = 0; k < config_.layers; ++k)
        h = ad::Relu(ad::MatMul(ad::SpMM(norm, h), weights_[k]));
      return h;
    case EncoderKind::kGIN:
      for (int k = 0; k < config_.layers; ++k) {
        ad::Var self =
            config_.gin_learn_epsilon
                ? ad::ScaleBy(h, ad::Add(epsilons_[k], ad::Constant(Tensor::Scalar(1.0))))
                : ad::Scale(h, 1.0 + config_.gin_epsilon);
        ad::Var agg = ad::Add(self, ad::SpMM(input.adjacency, h));
        ad::Var hidden = ad::Relu(ad::AddRow(ad::MatMul(agg, weights_[2 * k]), biases_[2 * k]));
        h = ad::AddRow(ad::MatMul(hidden, weights_[2 * k + 1]), biases_[2 * k + 1]);
      }
      return h;
    case EncoderKind::kTAG: {
      const size_t hops = static_cast<size_t>(config_.tag_hops) + 1;
      for (int k = 0; k < config_.layers; ++k) {
        ad::Var power = h;
        ad::Var sum = ad::MatMul(power, weights_[k * hops]);
        for (size_t p = 1; p < hops; ++p) {
          power = ad::SpMM(norm, power);
          sum = ad::Add(sum, ad::MatMul(power, weights_[k * hops + p]));
        }
        h = ad::Relu(sum);
      }
      return h;
    }
  }
  throw std::logic_error("unhandled encoder kind");
}

ad::Var GraphEncoder::Readout(const ad::Var &nodes) const {
  if (nodes.rows() == 0) throw ShapeError("readout of an empty graph");
  return config_.readout == ReadoutKind::kMean ? ad::MeanRows(nodes) : ad::SumRows(nodes);
}

std::vector<std::shared_ptr<const GraphEncoder>> MakeLevelEncoders(size_t levels,
                                                                   const EncoderConfig &config,
                                                                   ParameterStore &params,
                                                                   std::mt19937_64 &rng) {
  std::vector<std::shared_ptr<const GraphEncoder>> encoders;
  for (size_t t = 0; t < levels; ++t)
    encoders.push_back(
        std::make_shared<GraphEncoder>("enc" + std::to_string(t), config, params, rng));
  return encoders;
}

}  // namespace hmgrec
