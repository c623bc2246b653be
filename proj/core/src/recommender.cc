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

#include "hmgrec/recommender.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hmgrec {

std::string_view FusionKindName(FusionKind kind) {
  switch (kind) {
    case FusionKind::kMean:
      return "mean";
    case FusionKind::kSum:
      return "sum";
    case FusionKind::kMlp:
      return "mlp";
    case FusionKind::kPnlf:
      return "pnlf";
  }
  return "?";
}

std::optional<FusionKind> ParseFusionKind(std::string_view name) {
  for (FusionKind k : {FusionKind::kMean, FusionKind::kSum, FusionKind::kMlp, FusionKind::kPnlf})
    if (FusionKindName(k) == name) return k;
  return std::nullopt;
}

Fusion::Fusion(const FusionConfig &config, size_t levels, size_t hidden, size_t num_users,
               ParameterStore &params, std::mt19937_64 &rng)
    : config_(config), levels_(levels), hidden_(hidden) {
  if (levels == 0) throw std::invalid_argument("fusion over zero levels");
  if (config_.kind == FusionKind::kMlp) {
    const size_t in = levels * hidden;
    w1_ = params.AddUniform("fusion.mlp.w1", in, hidden, in, rng);
    b1_ = params.Add("fusion.mlp.b1", Tensor(1, hidden));
    w2_ = params.AddUniform("fusion.mlp.w2", hidden, hidden, hidden, rng);
    b2_ = params.Add("fusion.mlp.b2", Tensor(1, hidden));
    parameters_ = {w1_, b1_, w2_, b2_};
  } else if (config_.kind == FusionKind::kPnlf) {
    query_ =
        params.AddUniform("fusion.pnlf.query", std::max<size_t>(num_users, 1), hidden, hidden, rng);
    project_ = params.AddUniform("fusion.pnlf.w", hidden, hidden, hidden, rng);
    parameters_ = {query_, project_};
  }
}

ad::Var Fusion::AttentionWeights(std::span<const ad::Var> embeddings, uint32_t user) const {
  if (config_.kind != FusionKind::kPnlf) throw std::logic_error("attention weights need PNLF");
  ad::Var stacked = ad::ConcatRows(embeddings);
  const ad::Var tables[] = {query_};
  const ad::RowRef ref[] = {{0, user}};
  ad::Var q = ad::GatherRows(tables, ref);
  ad::Var logits = ad::MatMul(ad::Tanh(ad::MatMul(stacked, project_)), ad::Transpose(q));
  return ad::SoftmaxRows(ad::Transpose(logits));
}

ad::Var Fusion::Fuse(std::span<const ad::Var> embeddings, uint32_t user) const {
  if (embeddings.size() != levels_) throw ShapeError("fusion expects one embedding per level");
  for (const ad::Var &e : embeddings)
    if (e.rows() != 1 || e.cols() != hidden_)
      throw ShapeError("fusion input " + ShapeString(e.value()));
  switch (config_.kind) {
    case FusionKind::kMean:
      return ad::MeanRows(ad::ConcatRows(embeddings));
    case FusionKind::kSum:
      return ad::SumRows(ad::ConcatRows(embeddings));
    case FusionKind::kMlp: {
      ad::Var hidden = ad::Tanh(ad::AddRow(ad::MatMul(ad::ConcatCols(embeddings), w1_), b1_));
      return ad::AddRow(ad::MatMul(hidden, w2_), b2_);
    }
    case FusionKind::kPnlf:
      return ad::MatMul(AttentionWeights(embeddings, user), ad::ConcatRows(embeddings));
  }
  throw std::logic_error("unhandled fusion kind");
}

ad::Var ScoreLogits(const ad::Var &unified, const ad::Var &scoring, const ad::Var &items) {
  return ad::MatMul(ad::MatMul(unified, scoring), ad::Transpose(items));
}

double ScoreProbability(std::span<const double> unified, std::span<const double> item,
                        const Tensor &scoring) {
  if (unified.size() != scoring.rows() || item.size() != scoring.cols())
    throw ShapeError("score dimensions");
  double z = 0.0;
  for (size_t i = 0; i < unified.size(); ++i)
    for (size_t j = 0; j < item.size(); ++j) z += unified[i] * scoring(i, j) * item[j];
  return 1.0 / (1.0 + std::exp(-z));
}

double RecommendationLoss(std::span<const double> predictions, std::span<const double> labels) {
  ad::NoGradGuard guard;
  return ad::BinaryCrossEntropy(ad::Constant(Tensor::Row(predictions)), labels).value().item();
}

double TotalLoss(double contrastive, double recommendation, double beta) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("beta must lie in [0, 1]");
  return (1.0 - beta) * contrastive + beta * recommendation;
}

ad::Var TotalLoss(const ad::Var &contrastive, const ad::Var &recommendation, double beta) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("beta must lie in [0, 1]");
  return ad::Add(ad::Scale(contrastive, 1.0 - beta), ad::Scale(recommendation, beta));
}

std::vector<uint32_t> SampleExcluding(size_t num_items, std::span<const uint32_t> excluded,
                                      size_t k, std::mt19937_64 &rng) {
  std::vector<uint32_t> eligible;
  eligible.reserve(num_items);
  size_t e = 0;
  for (uint32_t i = 0; i < num_items; ++i) {
    while (e < excluded.size() && excluded[e] < i) ++e;
    if (e < excluded.size() && excluded[e] == i) continue;
    eligible.push_back(i);
  }
  if (eligible.empty()) throw NoNegativesError("no eligible items to sample");
  const size_t take = std::min(k, eligible.size());
  // Partial Fisher-Yates.
  for (size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
  }
  eligible.resize(take);
  return eligible;
}

std::vector<uint32_t> TargetItems(const Dataset &dataset, uint32_t user) {
  std::vector<uint32_t> items;
  const int target = dataset.vocab().target();
  for (const Interaction &r : dataset.UserRecords(user))
    if (r.behavior == target) items.push_back(r.item);
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

std::vector<uint32_t> SampleNegatives(const Dataset &dataset, uint32_t user, size_t k,
                                      std::mt19937_64 &rng) {
  if (k == 0) throw std::invalid_argument("negative sample size must be at least 1");
  const auto bought = TargetItems(dataset, user);
  return SampleExcluding(dataset.num_items(), bought, k, rng);
}

void TrainConfig::Validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
  if (hidden < 1) throw std::invalid_argument("hidden must be >= 1");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (neg_ratio < 1) throw std::invalid_argument("neg_ratio must be >= 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (max_chain < 1) throw std::invalid_argument("max_chain must be >= 1");
  if (encoder.hidden != hidden) throw std::invalid_argument("encoder hidden must equal hidden");
  encoder.Validate();
}

GraphCache::GraphCache(const Dataset &dataset, size_t max_chain) {
  inputs_.resize(dataset.num_users());
  for (uint32_t u = 0; u < dataset.num_users(); ++u)
    for (const HyperMetaGraph &g : BuildAllLevels(dataset, u, max_chain))
      inputs_[u].push_back(ToEncoderInput(g));
}

std::span<const EncoderInput> GraphCache::Get(uint32_t user) const {
  if (user >= inputs_.size()) throw std::out_of_range("unknown user id " + std::to_string(user));
  return inputs_[user];
}

HmgModel::HmgModel(const TrainConfig &config, size_t num_users, size_t num_items, size_t levels)
    : config_(config), num_users_(num_users), num_items_(num_items), levels_(levels) {
  config_.encoder.hidden = config_.hidden;
  config_.Validate();
  if (levels < 2) throw std::invalid_argument("need at least two behavior levels");
  std::mt19937_64 rng(config_.seed);
  const size_t h = config_.hidden;
  tables_.push_back(params_.AddUniform("features.user", std::max<size_t>(num_users, 1), h, h, rng));
  tables_.push_back(params_.AddUniform("features.behavior", levels, h, h, rng));
  tables_.push_back(params_.AddUniform("features.item", std::max<size_t>(num_items, 1), h, h, rng));
  item_table_ = config_.share_item_table
                    ? tables_[kItemFeatures]
                    : params_.AddUniform("items.target", std::max<size_t>(num_items, 1), h, h, rng);
  scoring_ = params_.AddUniform("score.w", h, h, h, rng);
  encoders_ = MakeLevelEncoders(levels, config_.encoder, params_, rng);
  fusion_ = std::make_unique<Fusion>(config_.fusion, levels, h, num_users, params_, rng);
}

HmgModel::UserForward HmgModel::Forward(uint32_t user, std::span<const EncoderInput> graphs) const {
  if (user >= num_users_) throw std::out_of_range("unknown user id " + std::to_string(user));
  UserForward out;
  out.contrast = BuildContrastEmbeddings(graphs, encoders_, tables_);
  out.unified = fusion_->Fuse(out.contrast.primary, user);
  return out;
}

ad::Var HmgModel::ScoreItems(const ad::Var &unified, std::span<const uint32_t> items) const {
  std::vector<ad::RowRef> refs;
  refs.reserve(items.size());
  for (uint32_t i : items) refs.push_back({0, i});
  const ad::Var table[] = {item_table_};
  return ScoreLogits(unified, scoring_, ad::GatherRows(table, refs));
}

std::vector<double> HmgModel::Scores(uint32_t user, std::span<const EncoderInput> graphs,
                                     std::span<const uint32_t> items) const {
  ad::NoGradGuard guard;
  const UserForward fwd = Forward(user, graphs);
  const ad::Var logits = ScoreItems(fwd.unified, items);
  return {logits.value().values().begin(), logits.value().values().end()};
}

ModelState::ModelState(const TrainConfig &config, size_t num_users, size_t num_items, size_t levels)
    : model(config, num_users, num_items, levels),
      optimizer(config.optimizer, AdamConfig{config.lr, config.weight_decay}) {}

BatchLoss ComputeBatchLoss(const HmgModel &model, const Dataset &train, const GraphCache &graphs,
                           std::span<const uint32_t> users, std::mt19937_64 &rng) {
  const TrainConfig &config = model.config();
  BatchLoss out;
  std::vector<ad::Var> user_losses;
  std::vector<ad::Var> probabilities;
  std::vector<double> labels;
  for (uint32_t u : users) {
    const HmgModel::UserForward fwd = model.Forward(u, graphs.Get(u));
    ad::Var contra = UserContrastiveLoss(fwd.contrast.triples, config.temperature);
    out.contrastive_sum += contra.value().item();
    user_losses.push_back(contra);

    const std::vector<uint32_t> positives = TargetItems(train, u);
    if (positives.empty()) continue;
    std::vector<uint32_t> items = positives;
    const size_t want = positives.size() * static_cast<size_t>(config.neg_ratio);
    if (positives.size() < train.num_items()) {
      const auto negatives = SampleExcluding(train.num_items(), positives, want, rng);
      items.insert(items.end(), negatives.begin(), negatives.end());
    }
    probabilities.push_back(ad::Sigmoid(model.ScoreItems(fwd.unified, items)));
    for (size_t i = 0; i < items.size(); ++i) labels.push_back(i < positives.size() ? 1.0 : 0.0);
  }
  if (user_losses.empty()) throw std::invalid_argument("empty batch");
  out.contrastive = ad::Scale(ad::SumAll(ad::ConcatCols(user_losses)),
                              1.0 / static_cast<double>(user_losses.size()));
  if (probabilities.empty()) {
    out.total = ad::Scale(out.contrastive, 1.0 - config.beta);
    return out;
  }
  out.recommendation = ad::BinaryCrossEntropy(ad::ConcatCols(probabilities), labels);
  out.pairs = labels.size();
  out.recommendation_sum = out.recommendation.value().item() * static_cast<double>(out.pairs);
  out.total = TotalLoss(out.contrastive, out.recommendation, config.beta);
  return out;
}

void Train(const Dataset &train, ModelState &state,
           const std::function<void(const LossRecord &)> &on_epoch) {
  HmgModel &model = state.model;
  const TrainConfig &config = model.config();
  if (train.num_users() != model.num_users() || train.num_items() != model.num_items())
    throw std::invalid_argument("dataset does not match the model's user/item tables");
  if (config.epochs == 0) return;
  const GraphCache graphs(train, config.max_chain);
  std::mt19937_64 rng(config.seed ^ 0x5bd1e9955bd1e995ULL);
  std::vector<uint32_t> order(train.num_users());
  std::iota(order.begin(), order.end(), 0u);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double contra_sum = 0.0;
    double rec_sum = 0.0;
    size_t pairs = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const uint32_t> batch(order.data() + start, end - start);
      try {
        BatchLoss loss = ComputeBatchLoss(model, train, graphs, batch, rng);
        ad::Backward(loss.total);
        state.optimizer.Step(model.params());
        contra_sum += loss.contrastive_sum;
        rec_sum += loss.recommendation_sum;
        pairs += loss.pairs;
      } catch (const NonFiniteError &e) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) +
                              ", batch " + std::to_string(start / config.batch_size) + ": " +
                              e.what());
      }
      model.params().ZeroGrad();
    }
    LossRecord record;
    record.epoch = static_cast<int>(state.history.size()) + 1;
    record.contrastive = contra_sum / static_cast<double>(std::max<size_t>(order.size(), 1));
    record.recommendation = pairs == 0 ? 0.0 : rec_sum / static_cast<double>(pairs);
    record.total = TotalLoss(record.contrastive, record.recommendation, config.beta);
    state.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
}

std::vector<ScoredItem> RankItems(std::vector<ScoredItem> scored, size_t k) {
  std::sort(scored.begin(), scored.end(), [](const ScoredItem &a, const ScoredItem &b) {
    return a.score != b.score ? a.score > b.score : a.item < b.item;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

std::vector<ScoredItem> RecommendTopK(const HmgModel &model, const GraphCache &graphs,
                                      uint32_t user, size_t k,
                                      std::span<const uint32_t> candidates) {
  if (user >= model.num_users() || user >= graphs.num_users())
    throw std::out_of_range("unknown user id " + std::to_string(user));
  if (candidates.empty()) throw std::invalid_argument("no candidate items");
  const std::vector<double> scores = model.Scores(user, graphs.Get(user), candidates);
  std::vector<ScoredItem> scored;
  scored.reserve(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) scored.push_back({candidates[i], scores[i]});
  return RankItems(std::move(scored), k);
}

}  // namespace hmgrec
