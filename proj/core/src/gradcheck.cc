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

#include "hmgrec/gradcheck.h"

#include <numeric>
#include <random>

namespace hmgrec {

Dataset GradCheckDataset() {
  const std::vector<InteractionRecord> records = {
      {"1", "10", "", 0, 100}, {"1", "10", "", 1, 110}, {"1", "10", "", 3, 120},
      {"1", "11", "", 2, 130}, {"1", "11", "", 3, 140}, {"1", "12", "", 0, 150},
      {"2", "12", "", 3, 100}, {"2", "11", "", 0, 105}, {"2", "11", "", 3, 115},
      {"2", "10", "", 2, 125},
  };
  return Dataset::FromRecords(BehaviorVocab::Default(), records);
}

std::vector<GradCheckResult> GradCheckJointObjective(TrainConfig config, double tolerance,
                                                     double eps) {
  config.hidden = 4;
  config.encoder.hidden = 4;
  config.neg_ratio = 1;
  const Dataset data = GradCheckDataset();
  HmgModel model(config, data.num_users(), data.num_items(), data.vocab().size());
  std::mt19937_64 jitter_rng(config.seed ^ 0xB1A5ULL);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (const std::string &name : model.params().names()) {
    Tensor &value = ad::Var(model.params().Get(name)).mutable_value();
    if (value.Norm() != 0.0) continue;
    for (size_t i = 0; i < value.size(); ++i) value[i] = jitter(jitter_rng);
  }
  const GraphCache graphs(data, config.max_chain);
  std::vector<uint32_t> users(data.num_users());
  std::iota(users.begin(), users.end(), 0u);
  auto loss = [&] {
    std::mt19937_64 rng(config.seed);
    return ComputeBatchLoss(model, data, graphs, users, rng).total;
  };
  return GradCheck(model.params(), loss, tolerance, eps);
}

}  // namespace hmgrec
