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

#ifndef HMGREC_TOOLS_COMMANDS_H_
#define HMGREC_TOOLS_COMMANDS_H_

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmgrec/eval.h"
#include "hmgrec/ingest.h"
#include "hmgrec/parameters.h"
#include "hmgrec/recommender.h"
#include "hmgrec/run_config.h"
#include "hmgrec/synthetic.h"

namespace hmgrec::cli {

// Failure reported as one `error: <kind>: <message>` line.
class CommandError : public std::runtime_error {
 public:
  CommandError(std::string kind, const std::string &message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string &kind() const { return kind_; }

 private:
  std::string kind_;
};

// Options shared by every subcommand; set values override the config file.
struct CommonOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<size_t> threads;
  std::optional<std::string> encoder;
  std::optional<std::string> fusion;
  std::optional<double> beta;
  std::vector<std::string> overrides;  // key=value
};

RunConfig ResolveConfig(const CommonOptions &common);

struct SynthOptions {
  SyntheticSpec spec;
  std::string mix = "direct-buy=0.5,view-then-buy=0.5";
  std::string out;
};
void RunSynth(const SynthOptions &options, std::ostream &log);

struct IngestOptions {
  std::string input;
  std::string out;
  std::string stats;
};
void RunIngest(const IngestOptions &options, const RunConfig &config, std::ostream &log);

struct StatsOptions {
  std::string input;
  bool filter = false;
};
void RunStats(const StatsOptions &options, const RunConfig &config, std::ostream &out);

struct TrainOptions {
  std::string data;
  std::string checkpoint;
  std::string history;
};
void RunTrain(const TrainOptions &options, const RunConfig &config, std::ostream &log);

struct EvaluateOptions {
  std::string checkpoint;
  std::string data;
  std::string report;
  std::string table;
  std::optional<size_t> threads;
};
void RunEvaluate(const EvaluateOptions &options, std::ostream &out);

struct RecommendOptions {
  std::string checkpoint;
  std::string data;
  std::string user;
  size_t k = 10;
};
void RunRecommend(const RecommendOptions &options, std::ostream &out);

// Returns true when every tensor passes at `tolerance`.
bool RunGradCheck(const RunConfig &config, double tolerance, std::ostream &out);

// Reads an ingested dataset file (user,item,category,behavior,timestamp).
Dataset LoadDataset(const std::string &path, const RunConfig &config);
// Leave-one-out split derived from the configured seed.
EvalSplit MakeSplit(const Dataset &dataset, const RunConfig &config);

struct LoadedModel {
  RunConfig config;
  std::unique_ptr<HmgModel> model;
  std::vector<std::string> user_keys;
  std::vector<std::string> item_keys;
};
void SaveModel(const std::string &path, const HmgModel &model, const RunConfig &config,
               const Dataset &dataset);
LoadedModel LoadModel(const std::string &path);

void WriteHistoryCsv(const std::vector<LossRecord> &history, std::ostream &out);

// Entry point shared by the binary and tests. Returns the process exit code.
int Main(int argc, char **argv, std::ostream &out, std::ostream &err);

}  // namespace hmgrec::cli

#endif  // HMGREC_TOOLS_COMMANDS_H_
