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

#ifndef HMGREC_RUN_CONFIG_H_
#define HMGREC_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hmgrec/eval.h"
#include "hmgrec/ingest.h"
#include "hmgrec/recommender.h"

namespace hmgrec {

// Raised for unknown keys, malformed values and unreadable config files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a pipeline run needs. Every field has a key in the config file.
struct RunConfig {
  TrainConfig train;
  std::vector<std::string> behaviors{"pv", "fav", "cart", "buy"};  // weakest first, target last
  std::string columns = "user,item,category,behavior,timestamp";
  FilterOptions filter;
  std::vector<size_t> eval_ks{5, 10};
  size_t n_candidates = kDefaultCandidates;
  bool full_ranking = false;
  size_t threads = 1;

  std::string data_path;
  std::string checkpoint_path;
  std::string report_path;
  std::string history_path;
  std::string stats_path;

  BehaviorVocab vocab() const { return BehaviorVocab(behaviors); }
  ColumnSchema schema() const { return ColumnSchema::FromHeader(columns); }

  // Applies one key/value; throws ConfigError for unknown keys or bad values.
  void Set(const std::string &key, const std::string &value);
  // Canonical key/value list in a fixed order; doubles round-trip exactly.
  std::vector<std::pair<std::string, std::string>> ToKeyValues() const;
  std::string ToJson() const;
  void Validate() const;

  static RunConfig FromKeyValues(const std::vector<std::pair<std::string, std::string>> &kv);
  static RunConfig FromJson(const std::string &json);
};

// Parses `key = value` lines. Blank lines, `#` comments and `[section]`
// headers are skipped; section names do not prefix keys.
std::vector<std::pair<std::string, std::string>> ParseConfigText(const std::string &text);
RunConfig LoadRunConfig(const std::filesystem::path &path);

bool operator==(const RunConfig &a, const RunConfig &b);

}  // namespace hmgrec

#endif  // HMGREC_RUN_CONFIG_H_
