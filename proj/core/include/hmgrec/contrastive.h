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

#ifndef HMGREC_CONTRASTIVE_H_
#define HMGREC_CONTRASTIVE_H_

#include <memory>
#include <span>
#include <vector>

#include "hmgrec/autodiff.h"
#include "hmgrec/encoders.h"
#include "hmgrec/hyper_meta_graph.h"

namespace hmgrec {

// Embeddings contrasted between levels t-1 and t of one user.
//   previous = g_{t-1}(HG_{t-1})   negative partner
//   current  = g_t(HG_t)           anchor
//   cross    = g_{t-1}(HG_t)       positive partner
struct ContrastTriple {
  int level = 1;
  ad::Var previous;
  ad::Var current;
  ad::Var cross;
};

// dot(a, b) / temperature.
double Similarity(std::span<const double> a, std::span<const double> b, double temperature = 1.0);
ad::Var Similarity(const ad::Var &a, const ad::Var &b, double temperature = 1.0);

// -ln(e^pos / (e^pos + e^neg)), evaluated with max subtraction.
double InfoNcePairLoss(double positive_similarity, double negative_similarity);
ad::Var InfoNcePairLoss(const ContrastTriple &triple, double temperature = 1.0);

struct ContrastEmbeddings {
  std::vector<ad::Var> primary;         // h_0 .. h_l
  std::vector<ContrastTriple> triples;  // levels 1 .. l
};

// Encodes every level with its own encoder and, for t >= 1, the level-t graph
// again with encoder t-1. `tables` are the user, behavior and item feature
// tables indexed by EncoderInput::features.
ContrastEmbeddings BuildContrastEmbeddings(
    std::span<const EncoderInput> graphs,
    std::span<const std::shared_ptr<const GraphEncoder>> encoders, std::span<const ad::Var> tables);

// Sum over a user's level pairs.
ad::Var UserContrastiveLoss(std::span<const ContrastTriple> triples, double temperature = 1.0);
// Mean over users of their summed pair losses.
ad::Var ContrastiveLoss(std::span<const std::vector<ContrastTriple>> per_user,
                        double temperature = 1.0);
double ContrastiveLoss(std::span<const std::vector<double>> per_user_pair_losses);

}  // namespace hmgrec

#endif  // HMGREC_CONTRASTIVE_H_
