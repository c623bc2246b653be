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

#include "hmgrec/run_config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hmgrec {

namespace {

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = Trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::string JoinList(const std::vector<std::string> &parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

double ParseDouble(const std::string &key, const std::string &v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("invalid number for " + key + ": '" + v + "'");
  return out;
}

template <typename Int>
Int ParseInt(const std::string &key, const std::string &v) {
  Int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  return out;
}

bool ParseBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::Set(const std::string &key, const std::string &raw) {
  const std::string v = Trim(raw);
  TrainConfig &t = train;
  if (key == "lr")
    t.lr = ParseDouble(key, v);
  else if (key == "weight_decay")
    t.weight_decay = ParseDouble(key, v);
  else if (key == "hidden")
    t.encoder.hidden = t.hidden = ParseInt<size_t>(key, v);
  else if (key == "beta")
    t.beta = ParseDouble(key, v);
  else if (key == "neg_ratio")
    t.neg_ratio = ParseInt<int>(key, v);
  else if (key == "epochs")
    t.epochs = ParseInt<int>(key, v);
  else if (key == "batch_size")
    t.batch_size = ParseInt<size_t>(key, v);
  else if (key == "seed")
    t.seed = ParseInt<uint64_t>(key, v);
  else if (key == "temperature")
    t.temperature = ParseDouble(key, v);
  else if (key == "max_chain")
    t.max_chain = ParseInt<size_t>(key, v);
  else if (key == "optimizer") {
    if (v == "adam")
      t.optimizer = OptimizerKind::kAdam;
    else if (v == "sgd")
      t.optimizer = OptimizerKind::kSgd;
    else
      throw ConfigError("optimizer must be adam or sgd, got '" + v + "'");
  } else if (key == "share_item_table")
    t.share_item_table = ParseBool(key, v);
  else if (key == "encoder") {
    auto kind = ParseEncoderKind(v);
    if (!kind) throw ConfigError("encoder must be sg, gcn, gin or tag, got '" + v + "'");
    t.encoder.kind = *kind;
  } else if (key == "layers")
    t.encoder.layers = ParseInt<int>(key, v);
  else if (key == "tag_hops")
    t.encoder.tag_hops = ParseInt<int>(key, v);
  else if (key == "gin_epsilon")
    t.encoder.gin_epsilon = ParseDouble(key, v);
  else if (key == "gin_learn_epsilon")
    t.encoder.gin_learn_epsilon = ParseBool(key, v);
  else if (key == "readout") {
    auto kind = ParseReadoutKind(v);
    if (!kind) throw ConfigError("readout must be mean or sum, got '" + v + "'");
    t.encoder.readout = *kind;
  } else if (key == "fusion") {
    auto kind = ParseFusionKind(v);
    if (!kind) throw ConfigError("fusion must be mean, sum, mlp or pnlf, got '" + v + "'");
    t.fusion.kind = *kind;
  } else if (key == "behaviors")
    behaviors = SplitList(v);
  else if (key == "columns")
    columns = v;
  else if (key == "min_target_interactions")
    filter.min_target_interactions = ParseInt<int>(key, v);
  else if (key == "max_pv_per_user") {
    if (v == "none" || v.empty())
      filter.max_pv_per_user.reset();
    else
      filter.max_pv_per_user = ParseInt<int>(key, v);
  } else if (key == "eval_k") {
    eval_ks.clear();
    for (const std::string &k : SplitList(v)) eval_ks.push_back(ParseInt<size_t>(key, k));
  } else if (key == "n_candidates")
    n_candidates = ParseInt<size_t>(key, v);
  else if (key == "full_ranking")
    full_ranking = ParseBool(key, v);
  else if (key == "threads")
    threads = ParseInt<size_t>(key, v);
  else if (key == "data_path")
    data_path = v;
  else if (key == "checkpoint_path")
    checkpoint_path = v;
  else if (key == "report_path")
    report_path = v;
  else if (key == "history_path")
    history_path = v;
  else if (key == "stats_path")
    stats_path = v;
  else
    throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::ToKeyValues() const {
  const TrainConfig &t = train;
  std::vector<std::string> ks;
  for (size_t k : eval_ks) ks.push_back(std::to_string(k));
  return {
      {"lr", FormatDouble(t.lr)},
      {"weight_decay", FormatDouble(t.weight_decay)},
      {"hidden", std::to_string(t.hidden)},
      {"beta", FormatDouble(t.beta)},
      {"neg_ratio", std::to_string(t.neg_ratio)},
      {"epochs", std::to_string(t.epochs)},
      {"batch_size", std::to_string(t.batch_size)},
      {"seed", std::to_string(t.seed)},
      {"temperature", FormatDouble(t.temperature)},
      {"max_chain", std::to_string(t.max_chain)},
      {"optimizer", t.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
      {"share_item_table", t.share_item_table ? "true" : "false"},
      {"encoder", std::string(EncoderKindName(t.encoder.kind))},
      {"layers", std::to_string(t.encoder.layers)},
      {"tag_hops", std::to_string(t.encoder.tag_hops)},
      {"gin_epsilon", FormatDouble(t.encoder.gin_epsilon)},
      {"gin_learn_epsilon", t.encoder.gin_learn_epsilon ? "true" : "false"},
      {"readout", std::string(ReadoutKindName(t.encoder.readout))},
      {"fusion", std::string(FusionKindName(t.fusion.kind))},
      {"behaviors", JoinList(behaviors)},
      {"columns", columns},
      {"min_target_interactions", std::to_string(filter.min_target_interactions)},
      {"max_pv_per_user",
       filter.max_pv_per_user ? std::to_string(*filter.max_pv_per_user) : "none"},
      {"eval_k", JoinList(ks)},
      {"n_candidates", std::to_string(n_candidates)},
      {"full_ranking", full_ranking ? "true" : "false"},
      {"threads", std::to_string(threads)},
      {"data_path", data_path},
      {"checkpoint_path", checkpoint_path},
      {"report_path", report_path},
      {"history_path", history_path},
      {"stats_path", stats_path},
  };
}

std::string RunConfig::ToJson() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto &[k, v] : ToKeyValues()) doc[k] = v;
  return doc.dump();
}

void RunConfig::Validate() const {
  try {
    train.Validate();
    (void)vocab();
    (void)schema();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  if (behaviors.size() < 2) throw ConfigError("need at least two behaviors");
  if (filter.min_target_interactions < 1) throw ConfigError("min_target_interactions must be >= 1");
  if (eval_ks.empty()) throw ConfigError("eval_k must list at least one cutoff");
  for (size_t k : eval_ks)
    if (k == 0) throw ConfigError("eval_k entries must be positive");
  if (n_candidates == 0 && !full_ranking) throw ConfigError("n_candidates must be positive");
  if (threads == 0) throw ConfigError("threads must be >= 1");
}

RunConfig RunConfig::FromKeyValues(const std::vector<std::pair<std::string, std::string>> &kv) {
  RunConfig config;
  for (const auto &[k, v] : kv) config.Set(k, v);
  config.Validate();
  return config;
}

RunConfig RunConfig::FromJson(const std::string &json) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("malformed config snapshot: ") + e.what());
  }
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto &[k, v] : doc.items()) {
    if (!v.is_string()) throw ConfigError("config snapshot value for " + k + " is not a string");
    kv.emplace_back(k, v.get<std::string>());
  }
  return FromKeyValues(kv);
}

std::vector<std::pair<std::string, std::string>> ParseConfigText(const std::string &text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

RunConfig LoadRunConfig(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return RunConfig::FromKeyValues(ParseConfigText(buf.str()));
}

bool operator==(const RunConfig &a, const RunConfig &b) {
  return a.ToKeyValues() == b.ToKeyValues();
}

}  // namespace hmgrec
