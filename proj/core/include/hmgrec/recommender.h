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

#ifndef HMGREC_RECOMMENDER_H_
#define HMGREC_RECOMMENDER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmgrec/autodiff.h"
#include "hmgrec/contrastive.h"
#include "hmgrec/encoders.h"
#include "hmgrec/hyper_meta_graph.h"
#include "hmgrec/ingest.h"
#include "hmgrec/parameters.h"

namespace hmgrec {

enum class FusionKind { kMean, kSum, kMlp, kPnlf };

std::string_view FusionKindName(FusionKind kind);
std::optional<FusionKind> ParseFusionKind(std::string_view name);

struct FusionConfig {
  FusionKind kind = FusionKind::kMean;
};

// Maps the per-level behavior pattern embeddings h_0..h_l to one unified
// embedding.
//   MEAN, SUM: elementwise.
//   MLP:  tanh([h_0 .. h_l] W1 + b1) W2 + b2, widths h(l+1) -> h -> h.
//   PNLF: softmax_t(q_u . tanh(h_t W_f)) weighted sum of h_t, with a learned
//         query q_u per user.
class Fusion {
 public:
  Fusion(const FusionConfig &config, size_t levels, size_t hidden, size_t num_users,
         ParameterStore &params, std::mt19937_64 &rng);

  ad::Var Fuse(std::span<const ad::Var> embeddings, uint32_t user) const;
  // Attention weights (1 x levels); PNLF only.
  ad::Var AttentionWeights(std::span<const ad::Var> embeddings, uint32_t user) const;

  const FusionConfig &config() const { return config_; }
  const std::vector<ad::Var> &parameters() const { return parameters_; }

 private:
  FusionConfig config_;
  size_t levels_;
  size_t hidden_;
  std::vector<ad::Var> parameters_;
  ad::Var w1_, b1_, w2_, b2_;  // MLP
  ad::Var query_, project_;    // PNLF
};

// Pre-sigmoid scores unified W items^T for a 1 x h unified embedding, an
// h x h scoring matrix and k x h item rows; returns 1 x k.
ad::Var ScoreLogits(const ad::Var &unified, const ad::Var &scoring, const ad::Var &items);
// sigmoid(unified^T W item).
double ScoreProbability(std::span<const double> unified, std::span<const double> item,
                        const Tensor &scoring);

// Mean binary cross-entropy, predictions clamped to [1e-12, 1 - 1e-12].
double RecommendationLoss(std::span<const double> predictions, std::span<const double> labels);
// (1 - beta) * contrastive + beta * recommendation.
double TotalLoss(double contrastive, double recommendation, double beta);
ad::Var TotalLoss(const ad::Var &contrastive, const ad::Var &recommendation, double beta);

// Thrown when a user has bought every item.
class NoNegativesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform sample without replacement from items outside `excluded`
// (sorted ascending). Returns min(k, eligible) items in sampling order.
std::vector<uint32_t> SampleExcluding(size_t num_items, std::span<const uint32_t> excluded,
                                      size_t k, std::mt19937_64 &rng);
// Items the user never performed the target behavior on.
std::vector<uint32_t> SampleNegatives(const Dataset &dataset, uint32_t user, size_t k,
                                      std::mt19937_64 &rng);
// Sorted distinct items with a target-behavior record for the user.
std::vector<uint32_t> TargetItems(const Dataset &dataset, uint32_t user);

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 1e-6;
  size_t hidden = 16;
  double beta = 0.4;
  int neg_ratio = 4;
  int epochs = 50;
  size_t batch_size = 32;
  uint64_t seed = 42;
  double temperature = 1.0;
  size_t max_chain = kDefaultMaxChain;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  // Graph item features and scoring targets use one table when set.
  bool share_item_table = true;
  EncoderConfig encoder;
  FusionConfig fusion;

  // Throws std::invalid_argument on out-of-range values.
  void Validate() const;
};

// Encoder inputs for every user and level, built once per dataset.
class GraphCache {
 public:
  GraphCache(const Dataset &dataset, size_t max_chain);
  std::span<const EncoderInput> Get(uint32_t user) const;
  size_t num_users() const { return inputs_.size(); }

 private:
  std::vector<std::vector<EncoderInput>> inputs_;
};

// All trainable state: feature tables, per-level encoders, fusion and the
// scoring matrix.
class HmgModel {
 public:
  HmgModel(const TrainConfig &config, size_t num_users, size_t num_items, size_t levels);

  struct UserForward {
    ContrastEmbeddings contrast;
    ad::Var unified;
  };
  UserForward Forward(uint32_t user, std::span<const EncoderInput> graphs) const;
  // 1 x k pre-sigmoid scores.
  ad::Var ScoreItems(const ad::Var &unified, std::span<const uint32_t> items) const;
  // Pre-sigmoid scores without recording gradients.
  std::vector<double> Scores(uint32_t user, std::span<const EncoderInput> graphs,
                             std::span<const uint32_t> items) const;

  const TrainConfig &config() const { return config_; }
  size_t num_users() const { return num_users_; }
  size_t num_items() const { return num_items_; }
  size_t levels() const { return levels_; }
  ParameterStore &params() { return params_; }
  const ParameterStore &params() const { return params_; }
  const std::vector<std::shared_ptr<const GraphEncoder>> &encoders() const { return encoders_; }
  const Fusion &fusion() const { return *fusion_; }
  const ad::Var &scoring_matrix() const { return scoring_; }
  const ad::Var &item_embeddings() const { return item_table_; }
  std::span<const ad::Var> feature_tables() const { return tables_; }

 private:
  TrainConfig config_;
  size_t num_users_;
  size_t num_items_;
  size_t levels_;
  ParameterStore params_;
  std::vector<ad::Var> tables_;  // user, behavior, item (graph features)
  ad::Var item_table_;           // scoring targets
  ad::Var scoring_;
  std::vector<std::shared_ptr<const GraphEncoder>> encoders_;
  std::unique_ptr<Fusion> fusion_;
};

struct LossRecord {
  int epoch = 0;  // 1-based
  double contrastive = 0.0;
  double recommendation = 0.0;
  double total = 0.0;
};

// Aborts training when a loss or parameter becomes non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelState {
  explicit ModelState(const TrainConfig &config, size_t num_users, size_t num_items, size_t levels);
  HmgModel model;
  Optimizer optimizer;
  std::vector<LossRecord> history;
};

// Loss terms of one mini-batch. Each user contributes its level-pair losses,
// its target items as positives and neg_ratio sampled negatives per positive.
struct BatchLoss {
  ad::Var contrastive;     // mean over users
  ad::Var recommendation;  // mean over pairs; unset if the batch has no pairs
  ad::Var total;
  double contrastive_sum = 0.0;
  double recommendation_sum = 0.0;
  size_t pairs = 0;
};
BatchLoss ComputeBatchLoss(const HmgModel &model, const Dataset &train, const GraphCache &graphs,
                           std::span<const uint32_t> users, std::mt19937_64 &rng);

// Runs config.epochs epochs of shuffled mini-batch training, appending one
// LossRecord per epoch to state.history.
void Train(const Dataset &train, ModelState &state,
           const std::function<void(const LossRecord &)> &on_epoch = {});

struct ScoredItem {
  uint32_t item = 0;
  double score = 0.0;
  bool operator==(const ScoredItem &) const = default;
};

// Orders by score descending, then item id ascending; keeps the first k.
std::vector<ScoredItem> RankItems(std::vector<ScoredItem> scored, size_t k);
// Throws std::out_of_range for an unknown user or empty candidates.
std::vector<ScoredItem> RecommendTopK(const HmgModel &model, const GraphCache &graphs,
                                      uint32_t user, size_t k,
                                      std::span<const uint32_t> candidates);

}  // namespace hmgrec

#endif  // HMGREC_RECOMMENDER_H_
