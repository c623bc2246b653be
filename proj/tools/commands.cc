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

#include "commands.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "hmgrec/gradcheck.h"
#include "json.hpp"

namespace hmgrec::cli {

namespace {

std::ofstream OpenOutput(const std::string &path) {
  if (path.empty()) throw CommandError("usage", "missing output path");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError("io", "cannot write " + path);
  return out;
}

void RequireFile(const std::string &path, const std::string &what) {
  if (path.empty()) throw CommandError("usage", "missing " + what + " path");
  if (!std::filesystem::is_regular_file(path))
    throw CommandError("io", what + " not found: " + path);
}

}  // namespace

RunConfig ResolveConfig(const CommonOptions &common) {
  RunConfig config;
  std::vector<std::pair<std::string, std::string>> kv;
  if (!common.config_path.empty()) {
    RequireFile(common.config_path, "config");
    std::ifstream in(common.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    kv = ParseConfigText(buf.str());
  }
  for (const std::string &o : common.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    kv.emplace_back(o.substr(0, eq), o.substr(eq + 1));
  }
  if (common.seed) kv.emplace_back("seed", std::to_string(*common.seed));
  if (common.threads) kv.emplace_back("threads", std::to_string(*common.threads));
  if (common.encoder) kv.emplace_back("encoder", *common.encoder);
  if (common.fusion) kv.emplace_back("fusion", *common.fusion);
  if (common.beta) {
    std::ostringstream b;
    b << std::setprecision(17) << *common.beta;
    kv.emplace_back("beta", b.str());
  }
  return RunConfig::FromKeyValues(kv);
}

void RunSynth(const SynthOptions &options, std::ostream &log) {
  SyntheticSpec spec = options.spec;
  ParseArchetypeMix(options.mix, spec);
  const auto records = GenerateSynthetic(spec);
  std::ofstream out = OpenOutput(options.out);
  WriteInteractionLog(records, BehaviorVocab::Default(), out);
  log << "wrote " << records.size() << " records for " << spec.users << " users to " << options.out
      << '\n';
}

void RunIngest(const IngestOptions &options, const RunConfig &config, std::ostream &log) {
  RequireFile(options.input, "input log");
  const BehaviorVocab vocab = config.vocab();
  const ParseResult parsed = ParseInteractionLogFile(options.input, config.schema(), vocab);
  const Dataset dataset = FilterDataset(parsed.records, vocab, config.filter);
  {
    std::ofstream out = OpenOutput(options.out);
    WriteDatasetCsv(dataset, out);
  }
  const std::string stats = StatisticsToJson(ComputeStatistics(dataset));
  if (!options.stats.empty()) {
    std::ofstream out = OpenOutput(options.stats);
    out << stats << '\n';
  }
  log << "parsed " << parsed.records.size() << " records (" << parsed.malformed << " malformed, "
      << parsed.unknown_behavior << " unknown behavior); kept " << dataset.records().size()
      << " records, " << dataset.num_users() << " users, " << dataset.num_items() << " items\n";
}

void RunStats(const StatsOptions &options, const RunConfig &config, std::ostream &out) {
  RequireFile(options.input, "input log");
  const BehaviorVocab vocab = config.vocab();
  const ParseResult parsed = ParseInteractionLogFile(options.input, config.schema(), vocab);
  const Dataset dataset = options.filter ? FilterDataset(parsed.records, vocab, config.filter)
                                         : Dataset::FromRecords(vocab, parsed.records);
  out << StatisticsToJson(ComputeStatistics(dataset)) << '\n';
}

Dataset LoadDataset(const std::string &path, const RunConfig &config) {
  RequireFile(path, "dataset");
  const BehaviorVocab vocab = config.vocab();
  const ParseResult parsed = ParseInteractionLogFile(path, ColumnSchema::Taobao(), vocab);
  if (parsed.rejected() > 0)
    throw CommandError("data", path + " has " + std::to_string(parsed.rejected()) +
                                   " unreadable lines; is it an ingested dataset?");
  if (parsed.records.empty()) throw CommandError("data", path + " holds no records");
  return Dataset::FromRecords(vocab, parsed.records);
}

EvalSplit MakeSplit(const Dataset &dataset, const RunConfig &config) {
  std::mt19937_64 rng(config.train.seed * 0x9E3779B97F4A7C15ULL + 17);
  return LeaveOneOutSplit(dataset, config.n_candidates, rng, config.full_ranking);
}

void SaveModel(const std::string &path, const HmgModel &model, const RunConfig &config,
               const Dataset &dataset) {
  Checkpoint cp = SnapshotParameters(model.params());
  nlohmann::ordered_json meta;
  meta["config"] = nlohmann::ordered_json::parse(config.ToJson());
  meta["behaviors"] = dataset.vocab().names();
  meta["users"] = dataset.users().keys();
  meta["items"] = dataset.items().keys();
  cp.metadata_json = meta.dump();
  SaveCheckpoint(path, cp);
}

LoadedModel LoadModel(const std::string &path) {
  RequireFile(path, "checkpoint");
  const Checkpoint cp = LoadCheckpoint(path);
  const auto meta = nlohmann::json::parse(cp.metadata_json);
  LoadedModel loaded;
  loaded.config = RunConfig::FromJson(meta.at("config").dump());
  loaded.user_keys = meta.at("users").get<std::vector<std::string>>();
  loaded.item_keys = meta.at("items").get<std::vector<std::string>>();
  const auto behaviors = meta.at("behaviors").get<std::vector<std::string>>();
  loaded.model = std::make_unique<HmgModel>(loaded.config.train, loaded.user_keys.size(),
                                            loaded.item_keys.size(), behaviors.size());
  RestoreParameters(cp, loaded.model->params());
  return loaded;
}

void WriteHistoryCsv(const std::vector<LossRecord> &history, std::ostream &out) {
  out << "epoch,contra_loss,rec_loss\n" << std::setprecision(17);
  for (const LossRecord &r : history)
    out << r.epoch << ',' << r.contrastive << ',' << r.recommendation << '\n';
}

void RunTrain(const TrainOptions &options, const RunConfig &config, std::ostream &log) {
  const Dataset dataset = LoadDataset(options.data, config);
  const EvalSplit split = MakeSplit(dataset, config);
  ModelState state(config.train, dataset.num_users(), dataset.num_items(), dataset.vocab().size());
  Train(split.train, state, [&log](const LossRecord &r) {
    log << "epoch " << r.epoch << " contra " << r.contrastive << " rec " << r.recommendation
        << '\n';
  });
  if (options.checkpoint.empty()) throw CommandError("usage", "missing checkpoint path");
  SaveModel(options.checkpoint, state.model, config, dataset);
  if (!options.history.empty()) {
    std::ofstream out = OpenOutput(options.history);
    WriteHistoryCsv(state.history, out);
  }
  log << "saved checkpoint to " << options.checkpoint << '\n';
}

namespace {

void CheckModelMatches(const LoadedModel &loaded, const Dataset &dataset) {
  if (loaded.user_keys != dataset.users().keys() || loaded.item_keys != dataset.items().keys())
    throw CommandError("data", "checkpoint was trained on a different dataset");
}

}  // namespace

void RunEvaluate(const EvaluateOptions &options, std::ostream &out) {
  LoadedModel loaded = LoadModel(options.checkpoint);
  const Dataset dataset = LoadDataset(options.data, loaded.config);
  CheckModelMatches(loaded, dataset);
  const EvalSplit split = MakeSplit(dataset, loaded.config);
  const size_t threads = options.threads.value_or(loaded.config.threads);
  EvalReport report = Evaluate(*loaded.model, split, loaded.config.eval_ks, threads);
  report.config_json = loaded.config.ToJson();
  const std::string table = ReportToTable(report, "HMG");
  if (!options.report.empty()) {
    std::ofstream f = OpenOutput(options.report);
    f << ReportToJson(report, dataset) << '\n';
  }
  if (!options.table.empty()) {
    std::ofstream f = OpenOutput(options.table);
    f << table;
  }
  out << table;
}

void RunRecommend(const RecommendOptions &options, std::ostream &out) {
  LoadedModel loaded = LoadModel(options.checkpoint);
  const Dataset dataset = LoadDataset(options.data, loaded.config);
  CheckModelMatches(loaded, dataset);
  const auto user = dataset.users().Find(options.user);
  if (!user) throw CommandError("data", "unknown user '" + options.user + "'");
  const GraphCache graphs(dataset, loaded.config.train.max_chain);
  const std::vector<uint32_t> bought = TargetItems(dataset, *user);
  std::vector<uint32_t> candidates;
  for (uint32_t i = 0; i < dataset.num_items(); ++i)
    if (!std::binary_search(bought.begin(), bought.end(), i)) candidates.push_back(i);
  if (candidates.empty()) throw CommandError("data", "user has bought every item");
  const auto ranked = RecommendTopK(*loaded.model, graphs, *user, options.k, candidates);
  // Ranking uses logits; the printed score is the probability.
  out << "rank,item,score\n" << std::setprecision(6);
  for (size_t i = 0; i < ranked.size(); ++i)
    out << i + 1 << ',' << dataset.items().key(ranked[i].item) << ','
        << 1.0 / (1.0 + std::exp(-ranked[i].score)) << '\n';
}

bool RunGradCheck(const RunConfig &config, double tolerance, std::ostream &out) {
  const auto results = GradCheckJointObjective(config.train, tolerance);
  bool ok = true;
  out << std::scientific << std::setprecision(3);
  for (const GradCheckResult &r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " rel_err=" << r.relative_error << '\n';
    ok = ok && r.passed;
  }
  out << (ok ? "all tensors passed" : "gradient check failed") << '\n';
  return ok;
}

int Main(int argc, char **argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"hmgrec: hyper meta-graph contrastive recommender"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&common](CLI::App *cmd) {
    cmd->add_option("--config", common.config_path, "Config file (key = value)");
    cmd->add_option("--seed", common.seed, "Random seed");
    cmd->add_option("--threads", common.threads, "Worker cap");
    cmd->add_option("--encoder", common.encoder, "sg|gcn|gin|tag")
        ->check(CLI::IsMember({"sg", "gcn", "gin", "tag"}));
    cmd->add_option("--fusion", common.fusion, "mean|sum|mlp|pnlf")
        ->check(CLI::IsMember({"mean", "sum", "mlp", "pnlf"}));
    cmd->add_option("--beta", common.beta, "Recommendation weight in the joint loss")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--set", common.overrides, "Extra key=value config overrides");
  };

  SynthOptions synth;
  auto *synth_cmd = app.add_subcommand("synth", "Generate a planted synthetic interaction log");
  synth_cmd->add_option("--users", synth.spec.users);
  synth_cmd->add_option("--items", synth.spec.items);
  synth_cmd->add_option("--groups", synth.spec.groups);
  synth_cmd->add_option("--mix", synth.mix, "e.g. direct-buy=0.5,view-then-buy=0.5");
  synth_cmd->add_option("--seed", synth.spec.seed);
  synth_cmd->add_option("--out", synth.out)->required();

  IngestOptions ingest;
  auto *ingest_cmd = app.add_subcommand("ingest", "Parse, filter and index a raw log");
  ingest_cmd->add_option("--input", ingest.input)->required();
  ingest_cmd->add_option("--out", ingest.out)->required();
  ingest_cmd->add_option("--stats", ingest.stats, "Statistics JSON output");
  add_common(ingest_cmd);

  StatsOptions stats;
  auto *stats_cmd = app.add_subcommand("stats", "Print dataset statistics as JSON");
  stats_cmd->add_option("--input", stats.input)->required();
  stats_cmd->add_flag("--filter", stats.filter, "Apply the ingest filters first");
  add_common(stats_cmd);

  TrainOptions train;
  auto *train_cmd = app.add_subcommand("train", "Train on the leave-one-out training split");
  train_cmd->add_option("--data", train.data)->required();
  train_cmd->add_option("--checkpoint", train.checkpoint)->required();
  train_cmd->add_option("--history", train.history, "Loss history CSV output");
  add_common(train_cmd);

  EvaluateOptions evaluate;
  auto *eval_cmd = app.add_subcommand("evaluate", "Leave-one-out Recall@K / NDCG@K");
  eval_cmd->add_option("--checkpoint", evaluate.checkpoint)->required();
  eval_cmd->add_option("--data", evaluate.data)->required();
  eval_cmd->add_option("--report", evaluate.report, "Report JSON output");
  eval_cmd->add_option("--table", evaluate.table, "Report text table output");
  eval_cmd->add_option("--threads", evaluate.threads, "Worker cap");

  RecommendOptions recommend;
  auto *rec_cmd = app.add_subcommand("recommend", "Top-K items for one user");
  rec_cmd->add_option("--checkpoint", recommend.checkpoint)->required();
  rec_cmd->add_option("--data", recommend.data)->required();
  rec_cmd->add_option("--user", recommend.user)->required();
  rec_cmd->add_option("--k", recommend.k);

  double tolerance = 1e-4;
  auto *grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the joint loss");
  grad_cmd->add_option("--tolerance", tolerance);
  add_common(grad_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError &e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: usage: " << msg << '\n';
    return 2;
  }

  try {
    if (synth_cmd->parsed()) {
      RunSynth(synth, err);
    } else if (ingest_cmd->parsed()) {
      RunIngest(ingest, ResolveConfig(common), err);
    } else if (stats_cmd->parsed()) {
      RunStats(stats, ResolveConfig(common), out);
    } else if (train_cmd->parsed()) {
      RunTrain(train, ResolveConfig(common), err);
    } else if (eval_cmd->parsed()) {
      RunEvaluate(evaluate, out);
    } else if (rec_cmd->parsed()) {
      RunRecommend(recommend, out);
    } else if (grad_cmd->parsed()) {
      if (!RunGradCheck(ResolveConfig(common), tolerance, out)) {
        err << "error: gradcheck: at least one tensor exceeded tolerance\n";
        return 1;
      }
    }
  } catch (const CommandError &e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const ConfigError &e) {
    err << "error: config: " << e.what() << '\n';
    return 1;
  } catch (const EmptyDatasetError &e) {
    err << "error: data: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    err << "error: runtime: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hmgrec::cli
