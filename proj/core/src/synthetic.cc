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

#include "hmgrec/synthetic.h"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hmgrec {

namespace {

constexpr int kPv = 0, kFav = 1, kCart = 2, kBuy = 3;

struct Event {
  uint32_t item;
  int behavior;
};

}  // namespace

void SyntheticSpec::Validate() const {
  if (users == 0 || items == 0) throw std::invalid_argument("users and items must be positive");
  if (groups < 2 || groups > items) throw std::invalid_argument("groups must lie in [2, items]");
  if (direct_buy < 0 || view_then_buy < 0 || direct_buy + view_then_buy <= 0)
    throw std::invalid_argument("archetype mix weights must be non-negative and not all zero");
  if (min_buys < 1 || max_buys < min_buys) throw std::invalid_argument("bad purchase range");
  if (static_cast<size_t>(max_buys) > items) throw std::invalid_argument("more buys than items");
  if (in_group < 0 || in_group > 1) throw std::invalid_argument("in_group must lie in [0, 1]");
  if (min_browse < 0 || max_browse < min_browse) throw std::invalid_argument("bad browse range");
}

void ParseArchetypeMix(const std::string &text, SyntheticSpec &spec) {
  double direct = 0.0, viewer = 0.0;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto sep = part.find_first_of("=:");
    if (sep == std::string::npos) throw std::invalid_argument("mix entry '" + part + "' lacks '='");
    const std::string name = part.substr(0, sep);
    const double weight = std::stod(part.substr(sep + 1));
    if (name == "direct-buy")
      direct = weight;
    else if (name == "view-then-buy")
      viewer = weight;
    else
      throw std::invalid_argument("unknown archetype '" + name + "'");
  }
  spec.direct_buy = direct;
  spec.view_then_buy = viewer;
}

std::vector<InteractionRecord> GenerateSynthetic(const SyntheticSpec &spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  // Item i belongs to group i % groups; group g belongs to category g % 2.
  std::vector<std::vector<uint32_t>> members(spec.groups);
  for (uint32_t i = 0; i < spec.items; ++i) members[i % spec.groups].push_back(i);
  std::vector<size_t> category_groups[2];
  for (size_t g = 0; g < spec.groups; ++g) category_groups[g % 2].push_back(g);

  const double p_direct = spec.direct_buy / (spec.direct_buy + spec.view_then_buy);
  std::vector<InteractionRecord> records;
  for (size_t u = 0; u < spec.users; ++u) {
    const bool direct = unit(rng) < p_direct;
    const auto &choices = category_groups[direct ? 0 : 1];
    const size_t group = choices[std::uniform_int_distribution<size_t>(0, choices.size() - 1)(rng)];
    std::vector<uint32_t> pool = members[group];
    std::shuffle(pool.begin(), pool.end(), rng);

    // Distinct purchases, mostly from the taste group.
    const int buys = uniform(spec.min_buys, spec.max_buys);
    std::vector<uint32_t> bought;
    size_t next_in_group = 0;
    while (bought.size() < static_cast<size_t>(buys)) {
      uint32_t item;
      if (unit(rng) < spec.in_group && next_in_group < pool.size()) {
        item = pool[next_in_group++];
      } else {
        item = static_cast<uint32_t>(uniform(0, static_cast<int>(spec.items) - 1));
      }
      if (std::find(bought.begin(), bought.end(), item) == bought.end()) bought.push_back(item);
    }

    // Each episode is a short run of events on one item.
    std::vector<std::vector<Event>> episodes;
    for (uint32_t item : bought) {
      std::vector<Event> ep;
      if (!direct) {
        const int views = uniform(1, 3);
        for (int v = 0; v < views; ++v) ep.push_back({item, kPv});
        if (unit(rng) < 0.3) ep.push_back({item, kFav});
        if (unit(rng) < 0.3) ep.push_back({item, kCart});
      }
      ep.push_back({item, kBuy});
      episodes.push_back(std::move(ep));
    }
    if (!direct) {
      const int browse = uniform(spec.min_browse, spec.max_browse);
      for (int b = 0; b < browse && next_in_group < pool.size(); ++b) {
        const uint32_t item = pool[next_in_group++];
        if (std::find(bought.begin(), bought.end(), item) != bought.end()) continue;
        std::vector<Event> ep(static_cast<size_t>(uniform(1, 2)), Event{item, kPv});
        episodes.push_back(std::move(ep));
      }
    }
    std::shuffle(episodes.begin(), episodes.end(), rng);

    int64_t ts = 1511500000 + uniform(0, 7 * 86400);
    for (const auto &ep : episodes) {
      for (const Event &e : ep) {
        ts += uniform(30, 3600);
        InteractionRecord rec;
        rec.user = std::to_string(u + 1);
        rec.item = std::to_string(e.item + 1);
        rec.category = std::to_string((e.item % spec.groups) % 2 + 1);
        rec.behavior = e.behavior;
        rec.timestamp = ts;
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

void WriteInteractionLog(std::span<const InteractionRecord> records, const BehaviorVocab &vocab,
                         std::ostream &out) {
  for (const InteractionRecord &r : records)
    out << r.user << ',' << r.item << ',' << r.category << ',' << vocab.name(r.behavior) << ','
        << r.timestamp << '\n';
}

}  // namespace hmgrec
