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

#include "hmgrec/contrastive.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmgrec {

double Similarity(std::span<const double> a, std::span<const double> b, double temperature) {
  if (a.size() != b.size()) throw ShapeError("similarity of vectors with different lengths");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / temperature;
}

ad::Var Similarity(const ad::Var &a, const ad::Var &b, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  ad::Var dot = ad::Dot(a, b);
  return temperature == 1.0 ? dot : ad::Scale(dot, 1.0 / temperature);
}

double InfoNcePairLoss(double positive_similarity, double negative_similarity) {
  const double m = std::max(positive_similarity, negative_similarity);
  const double lse =
      m + std::log(std::exp(positive_similarity - m) + std::exp(negative_similarity - m));
  return lse - positive_similarity;
}

ad::Var InfoNcePairLoss(const ContrastTriple &triple, double temperature) {
  ad::Var pos = Similarity(triple.current, triple.cross, temperature);
  ad::Var neg = Similarity(triple.current, triple.previous, temperature);
  const ad::Var logits[] = {pos, neg};
  return ad::Sub(ad::LogSumExpRows(ad::ConcatCols(logits)), pos);
}

ContrastEmbeddings BuildContrastEmbeddings(
    std::span<const EncoderInput> graphs,
    std::span<const std::shared_ptr<const GraphEncoder>> encoders,
    std::span<const ad::Var> tables) {
  if (graphs.size() != encoders.size() || graphs.empty())
    throw std::invalid_argument("need one encoder per hyper meta-graph level");
  ContrastEmbeddings out;
  std::vector<ad::Var> features;
  for (const EncoderInput &g : graphs) features.push_back(ad::GatherRows(tables, g.features));
  for (size_t t = 0; t < graphs.size(); ++t)
    out.primary.push_back(encoders[t]->Embed(graphs[t], features[t]));
  for (size_t t = 1; t < graphs.size(); ++t) {
    ContrastTriple triple;
    triple.level = static_cast<int>(t);
    triple.previous = out.primary[t - 1];
    triple.current = out.primary[t];
    triple.cross = encoders[t - 1]->Embed(graphs[t], features[t]);
    out.triples.push_back(std::move(triple));
  }
  return out;
}

ad::Var UserContrastiveLoss(std::span<const ContrastTriple> triples, double temperature) {
  if (triples.empty()) throw std::invalid_argument("no contrast triples");
  std::vector<ad::Var> losses;
  for (const ContrastTriple &t : triples) losses.push_back(InfoNcePairLoss(t, temperature));
  return ad::SumAll(ad::ConcatCols(losses));
}

ad::Var ContrastiveLoss(std::span<const std::vector<ContrastTriple>> per_user, double temperature) {
  if (per_user.empty()) throw std::invalid_argument("contrastive loss over no users");
  std::vector<ad::Var> sums;
  for (const auto &triples : per_user) sums.push_back(UserContrastiveLoss(triples, temperature));
  return ad::Scale(ad::SumAll(ad::ConcatCols(sums)), 1.0 / static_cast<double>(per_user.size()));
}

double ContrastiveLoss(std::span<const std::vector<double>> per_user_pair_losses) {
  if (per_user_pair_losses.empty()) throw std::invalid_argument("contrastive loss over no users");
  double total = 0.0;
  for (const auto &pairs : per_user_pair_losses)
    for (double v : pairs) total += v;
  return total / static_cast<double>(per_user_pair_losses.size());
}

}  // namespace hmgrec
