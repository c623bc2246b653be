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

#ifndef HMGREC_EVAL_H_
#define HMGREC_EVAL_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hmgrec/ingest.h"
#include "hmgrec/recommender.h"

namespace hmgrec {

inline constexpr size_t kDefaultCandidates = 99;

// Leave-one-out split. For every user the chronologically last target record
// is held out; every record of that (user, item) pair is removed from the
// training data.
struct EvalSplit {
  Dataset train;                                  // same user/item indices as the source
  std::vector<uint32_t> held_out;                 // per user
  std::vector<std::vector<uint32_t>> candidates;  // per user, ascending ids
  size_t requested_candidates = kDefaultCandidates;
  bool full_ranking = false;
};

// Candidates are drawn uniformly from items the user never interacted with.
// When fewer than n_candidates such items exist, all of them are used.
// full_ranking ranks the held-out item against every such item instead.
// Throws std::invalid_argument for a user with fewer than two target records.
EvalSplit LeaveOneOutSplit(const Dataset &dataset, size_t n_candidates, std::mt19937_64 &rng,
                           bool full_ranking = false);

// 1 if the 1-based rank is within k.
double RecallAtK(size_t rank, size_t k);
// 1 / log2(rank + 1) within k, else 0 (single relevant item).
double NdcgAtK(size_t rank, size_t k);

// 1-based rank of `held_out` among `pool` under descending score with ties
// broken by ascending item id.
size_t RankOf(uint32_t held_out, double held_out_score, std::span<const uint32_t> pool,
              std::span<const double> pool_scores);

struct UserEvalRow {
  uint32_t user = 0;
  uint32_t held_out = 0;
  size_t pool_size = 0;
  size_t rank = 0;
  std::vector<double> recall;  // parallel to EvalReport::ks
  std::vector<double> ndcg;
};

struct EvalReport {
  std::vector<size_t> ks;
  std::vector<double> recall;  // means over users, parallel to ks
  std::vector<double> ndcg;
  std::vector<UserEvalRow> rows;
  size_t requested_candidates = kDefaultCandidates;
  bool full_ranking = false;
  std::string config_json = "{}";  // snapshot of the run configuration
  double wall_seconds = 0.0;
};

// Scores `items` for `user`; larger is better.
using Scorer = std::function<std::vector<double>(uint32_t user, std::span<const uint32_t> items)>;

// Ranks every user's held-out item in its pool. `threads` > 1 splits users
// across workers; the result does not depend on it.
EvalReport EvaluateWithScorer(const EvalSplit &split, const Scorer &scorer,
                              std::span<const size_t> ks, size_t threads = 1);
EvalReport Evaluate(const HmgModel &model, const EvalSplit &split,
                    std::span<const size_t> ks = std::vector<size_t>{5, 10}, size_t threads = 1);

// Machine-readable report. Wall time is left out so reports of identical
// runs compare equal.
std::string ReportToJson(const EvalReport &report, const Dataset &dataset,
                         bool include_rows = true);
// Aligned table with Recall@K columns followed by NDCG@K columns.
std::string ReportToTable(const EvalReport &report, const std::string &label = "model");

}  // namespace hmgrec

#endif  // HMGREC_EVAL_H_
