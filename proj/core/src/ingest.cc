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

#include "hmgrec/ingest.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "json.hpp"

namespace hmgrec {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    fields.push_back(Trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

bool IsNumeric(const std::string &s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Numeric keys sort by value, everything else lexicographically after them.
bool KeyLess(const std::string &a, const std::string &b) {
  const bool na = IsNumeric(a);
  const bool nb = IsNumeric(b);
  if (na != nb) return na;
  if (na && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

BehaviorVocab BehaviorVocab::Default() { return BehaviorVocab({"pv", "fav", "cart", "buy"}); }

BehaviorVocab::BehaviorVocab(std::vector<std::string> ordered_names) {
  if (ordered_names.empty()) throw std::invalid_argument("behavior vocabulary is empty");
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < ordered_names.size(); ++i) {
    if (ordered_names[i].empty() || !seen.insert(ordered_names[i]).second)
      throw std::invalid_argument("behavior names must be distinct and non-empty");
    types_.push_back({std::move(ordered_names[i]), static_cast<int>(i)});
  }
}

std::optional<int> BehaviorVocab::Find(std::string_view name) const {
  for (const BehaviorType &t : types_)
    if (t.name == name) return t.rank;
  return std::nullopt;
}

std::vector<std::string> BehaviorVocab::names() const {
  std::vector<std::string> out;
  for (const BehaviorType &t : types_) out.push_back(t.name);
  return out;
}

ColumnSchema ColumnSchema::FromHeader(std::string_view order) {
  ColumnSchema schema;
  schema.category.reset();
  int seen_user = -1, seen_item = -1, seen_behavior = -1, seen_ts = -1;
  const auto fields = SplitCommas(order);
  for (size_t i = 0; i < fields.size(); ++i) {
    const int col = static_cast<int>(i);
    const std::string_view f = fields[i];
    if (f == "user")
      seen_user = col;
    else if (f == "item")
      seen_item = col;
    else if (f == "category")
      schema.category = col;
    else if (f == "behavior")
      seen_behavior = col;
    else if (f == "timestamp")
      seen_ts = col;
    else if (!f.empty() && f != "-" && f != "_")
      throw std::invalid_argument("unknown column name '" + std::string(f) + "'");
  }
  if (seen_user < 0 || seen_item < 0 || seen_behavior < 0 || seen_ts < 0)
    throw std::invalid_argument("column order must name user, item, behavior and timestamp");
  schema.user = seen_user;
  schema.item = seen_item;
  schema.behavior = seen_behavior;
  schema.timestamp = seen_ts;
  return schema;
}

int ColumnSchema::RequiredColumns() const {
  return 1 + std::max({user, item, behavior, timestamp, category.value_or(0)});
}

ParseResult ParseInteractionLog(std::istream &source, const ColumnSchema &schema,
                                const BehaviorVocab &vocab) {
  ParseResult result;
  const size_t required = static_cast<size_t>(schema.RequiredColumns());
  std::string line;
  while (std::getline(source, line)) {
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto fields = SplitCommas(trimmed);
    if (fields.size() < required) {
      ++result.malformed;
      continue;
    }
    InteractionRecord rec;
    rec.user = std::string(fields[schema.user]);
    rec.item = std::string(fields[schema.item]);
    if (schema.category) rec.category = std::string(fields[*schema.category]);
    const std::string_view ts = fields[schema.timestamp];
    auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), rec.timestamp);
    if (rec.user.empty() || rec.item.empty() || ec != std::errc() || ptr != ts.data() + ts.size() ||
        rec.timestamp < 0) {
      ++result.malformed;
      continue;
    }
    const auto behavior = vocab.Find(fields[schema.behavior]);
    if (!behavior) {
      ++result.unknown_behavior;
      continue;
    }
    rec.behavior = *behavior;
    result.records.push_back(std::move(rec));
  }
  if (source.bad()) throw std::runtime_error("error reading interaction log");
  return result;
}

ParseResult ParseInteractionLogFile(const std::filesystem::path &path, const ColumnSchema &schema,
                                    const BehaviorVocab &vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ParseInteractionLog(in, schema, vocab);
}

KeyIndex::KeyIndex(std::vector<std::string> keys) : keys_(std::move(keys)) {
  std::sort(keys_.begin(), keys_.end(), KeyLess);
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  ids_.reserve(keys_.size());
  for (size_t i = 0; i < keys_.size(); ++i) ids_.emplace(keys_[i], static_cast<uint32_t>(i));
}

std::optional<uint32_t> KeyIndex::Find(const std::string &key) const {
  auto it = ids_.find(key);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

uint32_t KeyIndex::Id(const std::string &key) const {
  auto id = Find(key);
  if (!id) throw std::out_of_range("unknown key '" + key + "'");
  return *id;
}

Dataset::Dataset(BehaviorVocab vocab, KeyIndex users, KeyIndex items,
                 std::vector<Interaction> records)
    : vocab_(std::move(vocab)),
      users_(std::move(users)),
      items_(std::move(items)),
      records_(std::move(records)) {
  for (const Interaction &r : records_) {
    if (r.user >= users_.size() || r.item >= items_.size())
      throw std::out_of_range("record refers to an unindexed entity");
    if (r.behavior < 0 || static_cast<size_t>(r.behavior) >= vocab_.size())
      throw std::out_of_range("record behavior outside the vocabulary");
  }
  std::stable_sort(records_.begin(), records_.end(),
                   [](const Interaction &a, const Interaction &b) {
                     if (a.user != b.user) return a.user < b.user;
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     return a.sequence < b.sequence;
                   });
  user_offsets_.assign(users_.size() + 1, 0);
  for (const Interaction &r : records_) ++user_offsets_[r.user + 1];
  std::partial_sum(user_offsets_.begin(), user_offsets_.end(), user_offsets_.begin());
}

Dataset Dataset::FromRecords(BehaviorVocab vocab, std::span<const InteractionRecord> records) {
  std::vector<std::string> user_keys, item_keys;
  for (const InteractionRecord &r : records) {
    user_keys.push_back(r.user);
    item_keys.push_back(r.item);
  }
  KeyIndex users(std::move(user_keys));
  KeyIndex items(std::move(item_keys));
  std::vector<Interaction> rows;
  rows.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const InteractionRecord &r = records[i];
    rows.push_back({users.Id(r.user), items.Id(r.item), r.behavior, r.timestamp, i, r.category});
  }
  return Dataset(std::move(vocab), std::move(users), std::move(items), std::move(rows));
}

std::span<const Interaction> Dataset::UserRecords(uint32_t user) const {
  if (user >= users_.size()) throw std::out_of_range("unknown user id");
  return std::span<const Interaction>(records_).subspan(
      user_offsets_[user], user_offsets_[user + 1] - user_offsets_[user]);
}

std::vector<InteractionRecord> Dataset::ToRecords() const {
  std::vector<InteractionRecord> out;
  out.reserve(records_.size());
  for (const Interaction &r : records_)
    out.push_back({users_.key(r.user), items_.key(r.item), r.category, r.behavior, r.timestamp});
  return out;
}

Dataset FilterDataset(std::span<const InteractionRecord> records, const BehaviorVocab &vocab,
                      const FilterOptions &options) {
  if (options.min_target_interactions < 1)
    throw std::invalid_argument("min_target_interactions must be at least 1");
  const int target = vocab.target();
  const int page_view = 0;

  std::vector<size_t> alive(records.size());
  std::iota(alive.begin(), alive.end(), size_t{0});
  while (true) {
    std::unordered_map<std::string_view, int> user_buys, item_buys, user_views;
    for (size_t i : alive) {
      const InteractionRecord &r = records[i];
      user_buys.try_emplace(r.user, 0);
      item_buys.try_emplace(r.item, 0);
      if (r.behavior == target) {
        ++user_buys[r.user];
        ++item_buys[r.item];
      }
      if (r.behavior == page_view && page_view != target) ++user_views[r.user];
    }
    auto keep = [&](size_t i) {
      const InteractionRecord &r = records[i];
      if (user_buys[r.user] < options.min_target_interactions) return false;
      if (item_buys[r.item] < options.min_target_interactions) return false;
      if (options.max_pv_per_user && user_views[r.user] > *options.max_pv_per_user) return false;
      return true;
    };
    std::vector<size_t> next;
    next.reserve(alive.size());
    for (size_t i : alive)
      if (keep(i)) next.push_back(i);
    if (next.size() == alive.size()) break;
    alive = std::move(next);
  }
  if (alive.empty()) throw EmptyDatasetError();

  std::vector<InteractionRecord> kept;
  kept.reserve(alive.size());
  for (size_t i : alive) kept.push_back(records[i]);
  return Dataset::FromRecords(vocab, kept);
}

DatasetStats ComputeStatistics(const Dataset &dataset) {
  DatasetStats stats;
  stats.users = dataset.num_users();
  stats.items = dataset.num_items();
  stats.total = dataset.records().size();
  std::vector<uint64_t> counts(dataset.vocab().size(), 0);
  for (const Interaction &r : dataset.records()) ++counts[r.behavior];
  const double users = static_cast<double>(std::max<uint64_t>(stats.users, 1));
  for (size_t b = 0; b < counts.size(); ++b) {
    BehaviorStats s;
    s.name = dataset.vocab().name(static_cast<int>(b));
    s.count = counts[b];
    s.percentage = stats.total == 0 ? 0.0 : 100.0 * counts[b] / static_cast<double>(stats.total);
    s.average_per_user = static_cast<double>(counts[b]) / users;
    stats.behaviors.push_back(s);
  }
  stats.average_total = static_cast<double>(stats.total) / users;
  return stats;
}

std::string StatisticsToJson(const DatasetStats &stats) {
  nlohmann::ordered_json doc;
  doc["users"] = stats.users;
  doc["items"] = stats.items;
  nlohmann::ordered_json behaviors = nlohmann::ordered_json::object();
  for (const BehaviorStats &b : stats.behaviors)
    behaviors[b.name] = {{"count", b.count}, {"percentage", b.percentage}};
  doc["behaviors"] = std::move(behaviors);
  doc["total"] = stats.total;
  for (const BehaviorStats &b : stats.behaviors) doc["ave_" + b.name] = b.average_per_user;
  doc["ave_total"] = stats.average_total;
  return doc.dump(2);
}

void WriteDatasetCsv(const Dataset &dataset, std::ostream &out) {
  for (const Interaction &r : dataset.records()) {
    out << dataset.users().key(r.user) << ',' << dataset.items().key(r.item) << ',' << r.category
        << ',' << dataset.vocab().name(r.behavior) << ',' << r.timestamp << '\n';
  }
}

}  // namespace hmgrec
