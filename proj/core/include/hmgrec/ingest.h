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

#ifndef HMGREC_INGEST_H_
#define HMGREC_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hmgrec {

// Thrown when filtering removes every user.
class EmptyDatasetError : public std::runtime_error {
 public:
  EmptyDatasetError() : std::runtime_error("empty after filtering") {}
};

struct BehaviorType {
  std::string name;
  int rank = 0;  // distance-to-target order; the target has the largest rank
};

// Ordered behavior vocabulary, weakest first. The last entry is the target
// behavior (buy) being predicted.
class BehaviorVocab {
 public:
  // pv < fav < cart < buy.
  static BehaviorVocab Default();
  explicit BehaviorVocab(std::vector<std::string> ordered_names);

  size_t size() const { return types_.size(); }
  int target() const { return static_cast<int>(types_.size()) - 1; }
  const std::string &name(int rank) const { return types_.at(rank).name; }
  const std::vector<BehaviorType> &types() const { return types_; }
  std::optional<int> Find(std::string_view name) const;
  std::vector<std::string> names() const;

  bool operator==(const BehaviorVocab &other) const { return names() == other.names(); }

 private:
  std::vector<BehaviorType> types_;
};

// Which CSV column holds each field (0-based). Category is optional.
struct ColumnSchema {
  int user = 0;
  int item = 1;
  std::optional<int> category = 2;
  int behavior = 3;
  int timestamp = 4;

  // Public UserBehavior layout: user,item,category,behavior,timestamp.
  static ColumnSchema Taobao() { return {}; }
  // Parses an order such as "user,item,category,behavior,timestamp".
  static ColumnSchema FromHeader(std::string_view order);
  int RequiredColumns() const;
};

struct InteractionRecord {
  std::string user;
  std::string item;
  std::string category;
  int behavior = 0;  // rank in the vocabulary
  int64_t timestamp = 0;

  bool operator==(const InteractionRecord &) const = default;
};

struct ParseResult {
  std::vector<InteractionRecord> records;
  size_t malformed = 0;
  size_t unknown_behavior = 0;

  size_t rejected() const { return malformed + unknown_behavior; }
};

ParseResult ParseInteractionLog(std::istream &source, const ColumnSchema &schema,
                                const BehaviorVocab &vocab);
// Throws std::runtime_error when the file cannot be opened.
ParseResult ParseInteractionLogFile(const std::filesystem::path &path, const ColumnSchema &schema,
                                    const BehaviorVocab &vocab);

// Bidirectional map between raw keys and dense ids.
class KeyIndex {
 public:
  KeyIndex() = default;
  // Dense ids follow the sorted order of the keys (numeric keys numerically).
  explicit KeyIndex(std::vector<std::string> keys);

  size_t size() const { return keys_.size(); }
  const std::string &key(uint32_t id) const { return keys_.at(id); }
  std::optional<uint32_t> Find(const std::string &key) const;
  uint32_t Id(const std::string &key) const;
  const std::vector<std::string> &keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, uint32_t> ids_;
};

struct Interaction {
  uint32_t user = 0;
  uint32_t item = 0;
  int behavior = 0;
  int64_t timestamp = 0;
  uint64_t sequence = 0;  // position in the original input, breaks timestamp ties
  std::string category;
};

// Indexed interaction log. Records are sorted by (user, timestamp, sequence).
class Dataset {
 public:
  Dataset() = default;
  Dataset(BehaviorVocab vocab, KeyIndex users, KeyIndex items, std::vector<Interaction> records);
  // Indexes raw records, assigning sequence numbers from their order.
  static Dataset FromRecords(BehaviorVocab vocab, std::span<const InteractionRecord> records);

  const BehaviorVocab &vocab() const { return vocab_; }
  const KeyIndex &users() const { return users_; }
  const KeyIndex &items() const { return items_; }
  size_t num_users() const { return users_.size(); }
  size_t num_items() const { return items_.size(); }
  const std::vector<Interaction> &records() const { return records_; }
  std::span<const Interaction> UserRecords(uint32_t user) const;

  // Raw-key view of the records in stored order.
  std::vector<InteractionRecord> ToRecords() const;

 private:
  BehaviorVocab vocab_ = BehaviorVocab::Default();
  KeyIndex users_;
  KeyIndex items_;
  std::vector<Interaction> records_;
  std::vector<size_t> user_offsets_{0};
};

struct FilterOptions {
  int min_target_interactions = 5;
  // Cap on weakest-behavior (page view) records per user. Unset means no cap.
  std::optional<int> max_pv_per_user;
};

// Drops users and items with fewer than min_target_interactions target
// records (and users above the page-view cap), repeating until no record
// changes. Throws EmptyDatasetError if no user survives.
Dataset FilterDataset(std::span<const InteractionRecord> records, const BehaviorVocab &vocab,
                      const FilterOptions &options = {});

struct BehaviorStats {
  std::string name;
  uint64_t count = 0;
  double percentage = 0.0;
  double average_per_user = 0.0;
};

struct DatasetStats {
  uint64_t users = 0;
  uint64_t items = 0;
  uint64_t total = 0;
  double average_total = 0.0;
  std::vector<BehaviorStats> behaviors;  // vocabulary order
};

DatasetStats ComputeStatistics(const Dataset &dataset);
// JSON document with `users`, `items`, `behaviors.<name>.count|percentage`,
// `total`, `ave_<name>` and `ave_total`.
std::string StatisticsToJson(const DatasetStats &stats);

// Writes user,item,category,behavior,timestamp lines in stored order.
void WriteDatasetCsv(const Dataset &dataset, std::ostream &out);

}  // namespace hmgrec

#endif  // HMGREC_INGEST_H_
