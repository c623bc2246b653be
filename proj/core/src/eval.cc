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

#include "hmgrec/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace hmgrec {

EvalSplit LeaveOneOutSplit(const Dataset &dataset, size_t n_candidates, std::mt19937_64 &rng,
                           bool full_ranking) {
  const int target = dataset.vocab().target();
  EvalSplit split;
  split.requested_candidates = n_candidates;
  split.full_ranking = full_ranking;
  split.held_out.resize(dataset.num_users());
  split.candidates.resize(dataset.num_users());
  std::vector<Interaction> kept;
  kept.reserve(dataset.records().size());

  for (uint32_t u = 0; u < dataset.num_users(); ++u) {
    const auto records = dataset.UserRecords(u);
    const Interaction *last = nullptr;
    size_t buys = 0;
    for (const Interaction &r : records) {
      if (r.behavior != target) continue;
      ++buys;
      last = &r;  // records are in (timestamp, sequence) order
    }
    if (buys < 2) {
      throw std::invalid_argument("user " + dataset.users().key(u) +
                                  " has fewer than two target records");
    }
    const uint32_t held = last->item;
    split.held_out[u] = held;
    std::vector<uint32_t> interacted;
    for (const Interaction &r : records) {
      interacted.push_back(r.item);
      if (r.item != held) kept.push_back(r);
    }
    std::sort(interacted.begin(), interacted.end());
    interacted.erase(std::unique(interacted.begin(), interacted.end()), interacted.end());
    const size_t eligible = dataset.num_items() - interacted.size();
    if (eligible == 0) continue;
    std::vector<uint32_t> pool = SampleExcluding(dataset.num_items(), interacted,
                                                 full_ranking ? eligible : n_candidates, rng);
    std::sort(pool.begin(), pool.end());
    split.candidates[u] = std::move(pool);
  }
  split.train = Dataset(dataset.vocab(), dataset.users(), dataset.items(), std::move(kept));
  return split;
}

double RecallAtK(size_t rank, size_t k) {
  if (rank == 0) throw std::invalid_argument("ranks are 1-based");
  return rank <= k ? 1.0 : 0.0;
}

double NdcgAtK(size_t rank, size_t k) {
  if (rank == 0) throw std::invalid_argument("ranks are 1-based");
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

size_t RankOf(uint32_t held_out, double held_out_score, std::span<const uint32_t> pool,
              std::span<const double> pool_scores) {
  if (pool.size() != pool_scores.size()) throw std::invalid_argument("pool/score length mismatch");
  size_t ahead = 0;
  for (size_t i = 0; i < pool.size(); ++i) {
    if (pool[i] == held_out) continue;
    if (pool_scores[i] > held_out_score || (pool_scores[i] == held_out_score && pool[i] < held_out))
      ++ahead;
  }
  return ahead + 1;
}

EvalReport EvaluateWithScorer(const EvalSplit &split, const Scorer &scorer,
                              std::span<const size_t> ks, size_t threads) {
  const auto start = std::chrono::steady_clock::now();
  EvalReport report;
  report.ks.assign(ks.begin(), ks.end());
  report.requested_candidates = split.requested_candidates;
  report.full_ranking = split.full_ranking;
  const size_t users = split.held_out.size();
  report.rows.resize(users);

  auto evaluate_range = [&](size_t begin, size_t end) {
    for (size_t u = begin; u < end; ++u) {
      std::vector<uint32_t> pool;
      pool.push_back(split.held_out[u]);
      pool.insert(pool.end(), split.candidates[u].begin(), split.candidates[u].end());
      const std::vector<double> scores = scorer(static_cast<uint32_t>(u), pool);
      UserEvalRow &row = report.rows[u];
      row.user = static_cast<uint32_t>(u);
      row.held_out = split.held_out[u];
      row.pool_size = pool.size();
      row.rank =
          RankOf(pool[0], scores.at(0), std::span(pool).subspan(1), std::span(scores).subspan(1));
      for (size_t k : ks) {
        row.recall.push_back(RecallAtK(row.rank, k));
        row.ndcg.push_back(NdcgAtK(row.rank, k));
      }
    }
  };

  threads = std::max<size_t>(1, std::min(threads, users));
  if (threads == 1) {
    evaluate_range(0, users);
  } else {
    std::vector<std::thread> workers;
    const size_t chunk = (users + threads - 1) / threads;
    for (size_t t = 0; t < threads; ++t) {
      const size_t b = t * chunk;
      const size_t e = std::min(users, b + chunk);
      if (b < e) workers.emplace_back(evaluate_range, b, e);
    }
    for (std::thread &w : workers) w.join();
  }

  report.recall.assign(ks.size(), 0.0);
  report.ndcg.assign(ks.size(), 0.0);
  for (const UserEvalRow &row : report.rows) {
    for (size_t i = 0; i < ks.size(); ++i) {
      report.recall[i] += row.recall[i];
      report.ndcg[i] += row.ndcg[i];
    }
  }
  for (size_t i = 0; i < ks.size() && users > 0; ++i) {
    report.recall[i] /= static_cast<double>(users);
    report.ndcg[i] /= static_cast<double>(users);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

EvalReport Evaluate(const HmgModel &model, const EvalSplit &split, std::span<const size_t> ks,
                    size_t threads) {
  const GraphCache graphs(split.train, model.config().max_chain);
  Scorer scorer = [&](uint32_t user, std::span<const uint32_t> items) {
    return model.Scores(user, graphs.Get(user), items);
  };
  return EvaluateWithScorer(split, scorer, ks, threads);
}

std::string ReportToJson(const EvalReport &report, const Dataset &dataset, bool include_rows) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (size_t i = 0; i < report.ks.size(); ++i) {
    metrics["recall@" + std::to_string(report.ks[i])] = report.recall[i];
    metrics["ndcg@" + std::to_string(report.ks[i])] = report.ndcg[i];
  }
  doc["metrics"] = std::move(metrics);
  doc["users"] = report.rows.size();
  doc["protocol"] = {
      {"split", "leave-one-out"},
      {"candidates", report.full_ranking ? std::string("all non-interacted items")
                                         : std::to_string(report.requested_candidates) +
                                               " sampled non-interacted items"},
      {"recall_note", "one held-out item per user, so recall@k equals hit ratio"}};
  doc["config"] = nlohmann::ordered_json::parse(report.config_json);
  if (include_rows) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const UserEvalRow &row : report.rows) {
      nlohmann::ordered_json r;
      r["user"] = dataset.users().key(row.user);
      r["held_out"] = dataset.items().key(row.held_out);
      r["pool"] = row.pool_size;
      r["rank"] = row.rank;
      rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
  }
  return doc.dump(2);
}

std::string ReportToTable(const EvalReport &report, const std::string &label) {
  std::ostringstream out;
  const int width = 11;
  out << std::left << std::setw(16) << "Method";
  for (size_t k : report.ks)
    out << std::right << std::setw(width) << ("Recall@" + std::to_string(k));
  for (size_t k : report.ks) out << std::right << std::setw(width) << ("NDCG@" + std::to_string(k));
  out << '\n' << std::left << std::setw(16) << label << std::fixed << std::setprecision(4);
  for (double v : report.recall) out << std::right << std::setw(width) << v;
  for (double v : report.ndcg) out << std::right << std::setw(width) << v;
  out << '\n'
      << "users: " << report.rows.size() << ", candidates: "
      << (report.full_ranking ? std::string("all") : std::to_string(report.requested_candidates))
      << ", wall time: " << std::setprecision(2) << report.wall_seconds << " s\n";
  return out.str();
}

}  // namespace hmgrec
