// Copyright 2026 The rlrag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// rlrag command-line tool.
//
//   rlrag generate --seed 7 --out data/
//   rlrag index    --corpus data/corpus.jsonl --out data/index.json
//   rlrag oracle   --corpus data/corpus.jsonl --tasks data/eval.jsonl --out oracle.json
//   rlrag train    --corpus data/corpus.jsonl --tasks data/train.jsonl
//                  --checkpoint q.json --out metrics.csv
//   rlrag eval     --corpus data/corpus.jsonl --tasks data/eval.jsonl --checkpoint q.json
//   rlrag serve    --corpus data/corpus.jsonl --checkpoint q.json --port 8080
//   rlrag feedback-train --episodes episodes.jsonl --feedback feedback.jsonl --out rm.json
//
// Failures print {"error": {"code", "message"}} on stderr and exit 1.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rlrag/benchmark.hpp"
#include "rlrag/checkpoint.hpp"
#include "rlrag/corpus.hpp"
#include "rlrag/episode_store.hpp"
#include "rlrag/error.hpp"
#include "rlrag/evaluation.hpp"
#include "rlrag/io.hpp"
#include "rlrag/oracle.hpp"
#include "rlrag/prompting.hpp"
#include "rlrag/reasoner.hpp"
#include "rlrag/reward.hpp"
#include "rlrag/service.hpp"
#include "rlrag/trainer.hpp"

namespace {

using rlrag::Error;
using rlrag::ErrorCode;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string corpus;
  std::string index;
  std::string tasks;
  std::string checkpoint;
  std::string out;
  std::string templates;
  std::string backend = "simulated";
  std::string reasoner_config;
};

nlohmann::json ReadJsonFile(const std::string& path) {
  try {
    return nlohmann::json::parse(rlrag::ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("{}: {}", path, e.what()));
  }
}

rlrag::InvertedIndex LoadIndex(const CommonOptions& o) {
  if (!o.index.empty()) return rlrag::InvertedIndex::FromJson(ReadJsonFile(o.index));
  if (o.corpus.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--corpus or --index is required");
  }
  return rlrag::InvertedIndex::Build(rlrag::ReadCorpusJsonl(o.corpus));
}

std::vector<rlrag::TaskInstance> LoadTasks(const CommonOptions& o) {
  if (o.tasks.empty()) throw Error(ErrorCode::kInvalidArgument, "--tasks is required");
  return rlrag::ReadTasksJsonl(o.tasks);
}

std::vector<rlrag::PromptTemplate> LoadTemplates(const CommonOptions& o) {
  if (o.templates.empty()) return rlrag::DefaultTemplates();
  return rlrag::ParseTemplateLibrary(ReadJsonFile(o.templates));
}

std::unique_ptr<rlrag::Reasoner> MakeReasoner(const CommonOptions& o) {
  if (o.backend == "simulated") return std::make_unique<rlrag::SimulatedReasoner>();
  if (o.backend == "http") {
    rlrag::HttpReasonerConfig cfg;
    if (!o.reasoner_config.empty()) {
      cfg = rlrag::HttpReasonerConfigFromJson(ReadJsonFile(o.reasoner_config));
    }
    return std::make_unique<rlrag::HttpReasoner>(cfg);
  }
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown backend '{}'", o.backend));
}

rlrag::rl::TrainConfig LoadTrainConfig(const CommonOptions& o) {
  rlrag::rl::TrainConfig cfg;
  if (!o.config.empty()) cfg = rlrag::rl::ConfigFromJson(ReadJsonFile(o.config));
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

void WriteOrPrint(const std::string& path, const nlohmann::json& report) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    rlrag::WriteFile(path, text);
  }
}

void AddCorpusOptions(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--corpus", o.corpus, "Corpus JSONL");
  cmd->add_option("--index", o.index, "Index file written by `rlrag index`");
}

void AddReasonerOptions(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--backend", o.backend, "simulated or http")
      ->check(CLI::IsMember({"simulated", "http"}));
  cmd->add_option("--reasoner-config", o.reasoner_config, "HTTP reasoner config JSON");
  cmd->add_option("--templates", o.templates, "Template library JSON");
}

// generate ---------------------------------------------------------------

struct GenerateOptions {
  rlrag::BenchmarkParams params;
  std::size_t train_count = 50;
};

int RunGenerate(const CommonOptions& o, GenerateOptions g) {
  if (o.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  if (o.seed) g.params.seed = *o.seed;
  const rlrag::Benchmark bench = rlrag::GenerateBenchmark(g.params);
  if (g.train_count > bench.instances.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("--train {} exceeds the {} generated queries", g.train_count,
                            bench.instances.size()));
  }
  std::filesystem::create_directories(o.out);
  const std::filesystem::path dir(o.out);
  std::span<const rlrag::TaskInstance> all(bench.instances);
  rlrag::WriteFile((dir / "corpus.jsonl").string(), rlrag::WriteCorpusJsonl(bench.docs));
  rlrag::WriteFile((dir / "tasks.jsonl").string(), rlrag::WriteTasksJsonl(all));
  rlrag::WriteFile((dir / "train.jsonl").string(),
                   rlrag::WriteTasksJsonl(all.first(g.train_count)));
  rlrag::WriteFile((dir / "eval.jsonl").string(),
                   rlrag::WriteTasksJsonl(all.subspan(g.train_count)));
  std::size_t damaging = 0;
  for (const auto& inst : bench.instances) damaging += inst.damaging.empty() ? 0 : 1;
  std::cout << nlohmann::json{{"docs", bench.docs.size()},
                              {"instances", bench.instances.size()},
                              {"train", g.train_count},
                              {"eval", bench.instances.size() - g.train_count},
                              {"with_damaging", damaging}}
                   .dump()
            << "\n";
  return 0;
}

// index ------------------------------------------------------------------

int RunIndex(const CommonOptions& o) {
  if (o.corpus.empty() || o.out.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--corpus and --out are required");
  }
  const auto index = rlrag::InvertedIndex::Build(rlrag::ReadCorpusJsonl(o.corpus));
  rlrag::WriteFile(o.out, rlrag::DumpCompact(index.ToJson()) + "\n");
  std::cout << nlohmann::json{{"docs", index.doc_count()},
                              {"avg_doc_len", index.avg_doc_len().value_or(0.0)}}
                   .dump()
            << "\n";
  return 0;
}

// oracle -----------------------------------------------------------------

int RunOracle(const CommonOptions& o) {
  const auto index = LoadIndex(o);
  const auto tasks = LoadTasks(o);
  const auto templates = LoadTemplates(o);
  const auto cfg = LoadTrainConfig(o);
  auto reasoner = MakeReasoner(o);
  const auto envs = rlrag::rl::MakeEnvs(index, tasks, cfg.episode);
  nlohmann::json rows = nlohmann::json::array();
  double sum = 0.0;
  for (const auto& env : envs) {
    const auto best = rlrag::rl::BruteForceOptimum(env, templates, *reasoner);
    sum += best.reward.value;
    rows.push_back({{"instance_id", env.instance().instance_id},
                    {"template_id", best.template_id},
                    {"support", best.support},
                    {"reward", best.reward.value},
                    {"kind", rlrag::RewardKindName(best.reward.kind)},
                    {"evaluated", best.evaluated}});
  }
  const double mean = envs.empty() ? 0.0 : sum / static_cast<double>(envs.size());
  WriteOrPrint(o.out, {{"mean_optimal_reward", mean},
                       {"instances", rows.size()},
                       {"episode", rlrag::rl::EpisodeConfigToJson(cfg.episode)},
                       {"results", rows}});
  if (!o.out.empty()) std::cout << nlohmann::json{{"mean_optimal_reward", mean}}.dump() << "\n";
  return 0;
}

// train ------------------------------------------------------------------

struct TrainOptions {
  std::optional<std::size_t> max_episodes;
  std::string episodes;
  std::string feedback;
  std::string reward_model;
};

rlrag::TaskInstance InstanceForTrace(const rlrag::EpisodeTrace& t,
                                     const std::vector<rlrag::TaskInstance>& tasks) {
  for (const auto& inst : tasks) {
    if (inst.instance_id == t.instance_id) return inst;
  }
  rlrag::TaskInstance inst;
  inst.instance_id = t.instance_id;
  inst.task_description = t.task_description;
  inst.query = t.query;
  return inst;
}

int RunTrain(const CommonOptions& o, const TrainOptions& t) {
  if (o.checkpoint.empty() || o.out.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--checkpoint and --out are required");
  }
  const auto index = LoadIndex(o);
  const auto tasks = LoadTasks(o);
  auto cfg = LoadTrainConfig(o);
  if (t.max_episodes) cfg.max_episodes = *t.max_episodes;
  auto reasoner = MakeReasoner(o);

  rlrag::rl::Trainer trainer(index, tasks, cfg, LoadTemplates(o), *reasoner);

  std::unique_ptr<rlrag::FeedbackStore> feedback;
  if (!t.feedback.empty()) {
    feedback = std::make_unique<rlrag::FeedbackStore>(t.feedback);
    trainer.SetHumanRewardLookup(
        [&feedback](const std::string& id) { return feedback->HumanReward(id); });
  }
  std::optional<rlrag::RewardModel> reward_model;
  if (!t.reward_model.empty()) {
    reward_model = rlrag::LoadRewardModel(rlrag::ReadFile(t.reward_model));
    trainer.SetRewardModel(&*reward_model);
  }
  std::size_t ingested = 0;
  if (!t.episodes.empty()) {
    const rlrag::EpisodeStore store(t.episodes);
    const auto page = store.List(store.size(), 0);
    for (const auto& trace : page.items) {
      if (trainer.IngestTrace(*trace, InstanceForTrace(*trace, tasks))) ++ingested;
    }
  }

  std::ofstream csv(o.out, std::ios::binary | std::ios::trunc);
  if (!csv) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", o.out));
  csv << rlrag::rl::kMetricsHeader << '\n';
  trainer.SetEpisodeCallback([&csv](const rlrag::rl::EpisodeMetrics& m) {
    csv << rlrag::rl::MetricsCsvRow(m);
    csv.flush();
  });
  const auto result = trainer.Run();
  csv.close();

  rlrag::WriteCheckpoint(o.checkpoint, result.online, cfg,
                         rlrag::CorpusHash(index.documents()));
  double tail = 0.0;
  const std::size_t w = std::min(cfg.convergence_window, result.metrics.size());
  for (std::size_t i = result.metrics.size() - w; i < result.metrics.size(); ++i) {
    tail += result.metrics[i].reward;
  }
  std::cout << nlohmann::json{{"episodes", result.metrics.size()},
                              {"updates", result.updates},
                              {"action_steps", result.action_steps},
                              {"converged", result.converged},
                              {"ingested_traces", ingested},
                              {"final_window_mean_reward",
                               w == 0 ? 0.0 : tail / static_cast<double>(w)}}
                   .dump()
            << "\n";
  return 0;
}

// eval -------------------------------------------------------------------

int RunEval(const CommonOptions& o, bool with_traces, bool baselines) {
  if (o.checkpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "--checkpoint is required");
  const auto index = LoadIndex(o);
  const auto tasks = LoadTasks(o);
  const auto templates = LoadTemplates(o);
  const auto cp = rlrag::ReadCheckpoint(o.checkpoint);
  auto cfg = o.config.empty() ? cp.config : LoadTrainConfig(o);
  if (o.seed) cfg.seed = *o.seed;
  auto reasoner = MakeReasoner(o);
  const auto envs = rlrag::rl::MakeEnvs(index, tasks, cfg.episode);
  nlohmann::json report = {
      {"checkpoint", o.checkpoint},
      {"content_hash", cp.content_hash},
      {"dqn", rlrag::rl::SummaryToJson(
                  rlrag::rl::EvaluatePolicy(cp.net, envs, templates, *reasoner), with_traces)}};
  if (baselines) {
    report["bm25_top_k"] = rlrag::rl::SummaryToJson(
        rlrag::rl::EvaluateBm25TopK(envs, templates, *reasoner), with_traces);
    report["random"] = rlrag::rl::SummaryToJson(
        rlrag::rl::EvaluateRandomPolicy(envs, templates, *reasoner, cfg.seed), with_traces);
  }
  WriteOrPrint(o.out, report);
  return 0;
}

// serve ------------------------------------------------------------------

rlrag::Service* g_service = nullptr;

extern "C" void HandleStopSignal(int) {
  if (g_service != nullptr) g_service->Stop();
}

int RunServe(const CommonOptions& o, rlrag::ServiceConfig sc, const std::string& host,
             std::optional<int> port) {
  if (!o.config.empty()) sc = rlrag::ServiceConfigFromJson(ReadJsonFile(o.config));
  if (!o.corpus.empty()) sc.corpus_path = o.corpus;
  if (!o.tasks.empty()) sc.tasks_path = o.tasks;
  if (!o.checkpoint.empty()) sc.checkpoint_path = o.checkpoint;
  if (!host.empty()) sc.host = host;
  if (port) sc.port = *port;
  if (o.backend == "http") sc.backend = rlrag::BackendKind::kHttp;
  if (!o.reasoner_config.empty()) {
    sc.reasoner = rlrag::HttpReasonerConfigFromJson(ReadJsonFile(o.reasoner_config));
  }
  rlrag::CheckServicePaths(sc);

  auto index = rlrag::InvertedIndex::Build(rlrag::ReadCorpusJsonl(sc.corpus_path));
  std::vector<rlrag::TaskInstance> tasks;
  if (!sc.tasks_path.empty()) tasks = rlrag::ReadTasksJsonl(sc.tasks_path);
  const auto cp = rlrag::ReadCheckpoint(sc.checkpoint_path);
  std::unique_ptr<rlrag::Reasoner> reasoner;
  if (sc.backend == rlrag::BackendKind::kHttp) {
    reasoner = std::make_unique<rlrag::HttpReasoner>(sc.reasoner);
  } else {
    reasoner = std::make_unique<rlrag::SimulatedReasoner>();
  }
  rlrag::EpisodeStore episodes(sc.episodes_path);
  rlrag::FeedbackStore feedback(sc.feedback_path);
  rlrag::Service service(std::move(index), std::move(tasks), LoadTemplates(o), sc.episode,
                         std::move(reasoner), episodes, feedback, sc.metrics_path);
  service.LoadSnapshot(cp.net);
  if (!service.Bind(sc.host, sc.port)) {
    throw Error(ErrorCode::kIo, fmt::format("cannot bind {}:{}", sc.host, sc.port));
  }
  g_service = &service;
  std::signal(SIGINT, HandleStopSignal);
  std::signal(SIGTERM, HandleStopSignal);
  std::cerr << fmt::format("listening on {}:{}\n", sc.host, service.bound_port());
  service.ServeForever();
  g_service = nullptr;
  return 0;
}

// feedback-train ---------------------------------------------------------

struct FeedbackTrainOptions {
  std::string episodes;
  std::string feedback;
  std::size_t epochs = 2000;
  double lr = 0.05;
  std::vector<std::size_t> hidden = {16};
};

int RunFeedbackTrain(const CommonOptions& o, const FeedbackTrainOptions& f) {
  if (f.episodes.empty() || f.feedback.empty() || o.out.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--episodes, --feedback and --out are required");
  }
  for (const auto& p : {f.episodes, f.feedback}) {
    if (!std::filesystem::exists(p)) {
      throw Error(ErrorCode::kNotFound, fmt::format("'{}' does not exist", p));
    }
  }
  const rlrag::EpisodeStore store(f.episodes);
  const rlrag::FeedbackStore feedback(f.feedback);
  std::vector<rlrag::RewardExample> examples;
  for (const auto& record : feedback.All()) {
    const auto trace = store.Get(record.episode_id);
    if (!trace) {
      throw Error(ErrorCode::kNotFound,
                  fmt::format("feedback names unknown episode '{}'", record.episode_id));
    }
    examples.push_back({record, *trace});
  }
  if (examples.empty()) throw Error(ErrorCode::kInvalidArgument, "no feedback records");
  const std::uint64_t seed = o.seed.value_or(7);
  auto model = rlrag::TrainRewardModel(rlrag::RewardModel::Init(seed, f.hidden), examples,
                                       f.epochs, f.lr, seed);
  rlrag::WriteFile(o.out, rlrag::SaveRewardModel(model));
  std::cout << nlohmann::json{{"examples", examples.size()},
                              {"epochs", f.epochs},
                              {"train_mse", rlrag::RewardModelMse(model, examples)}}
                   .dump()
            << "\n";
  return 0;
}

void PrintError(std::string_view code, std::string_view message) {
  std::cerr << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reinforced retrieval-augmented prompting: train, evaluate and serve"};
  app.require_subcommand(1);
  CommonOptions o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "Config JSON");
    cmd->add_option("--seed", o.seed, "Overrides the config seed");
    cmd->add_option("--out", o.out, "Output path");
  };

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write the synthetic benchmark");
  add_common(generate);
  generate->add_option("--entities", gen.params.n_entities);
  generate->add_option("--attributes", gen.params.n_attributes);
  generate->add_option("--queries", gen.params.n_queries);
  generate->add_option("--damaging-rate", gen.params.damaging_rate);
  generate->add_option("--multi-hop", gen.params.multi_hop_fraction);
  generate->add_option("--train", gen.train_count, "Leading queries written to train.jsonl");

  auto* index = app.add_subcommand("index", "Build a BM25 index from corpus JSONL");
  add_common(index);
  index->add_option("--corpus", o.corpus, "Corpus JSONL")->required();

  auto* oracle = app.add_subcommand("oracle", "Brute-force optimal reward per task");
  add_common(oracle);
  AddCorpusOptions(oracle, o);
  AddReasonerOptions(oracle, o);
  oracle->add_option("--tasks", o.tasks, "Tasks JSONL")->required();

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "Train the Q-network");
  add_common(train);
  AddCorpusOptions(train, o);
  AddReasonerOptions(train, o);
  train->add_option("--tasks", o.tasks, "Training tasks JSONL")->required();
  train->add_option("--checkpoint", o.checkpoint, "Where to write the trained net")->required();
  train->add_option("--max-episodes", tr.max_episodes);
  train->add_option("--episodes", tr.episodes, "Episode log to replay with stored feedback");
  train->add_option("--feedback", tr.feedback, "Feedback log; ratings override rewards");
  train->add_option("--reward-model", tr.reward_model, "Reward model for unrated traces");

  bool with_traces = false;
  bool baselines = true;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and the baselines");
  add_common(eval);
  AddCorpusOptions(eval, o);
  AddReasonerOptions(eval, o);
  eval->add_option("--tasks", o.tasks, "Tasks JSONL")->required();
  eval->add_option("--checkpoint", o.checkpoint, "Trained net")->required();
  eval->add_flag("--traces", with_traces, "Include every episode trace");
  eval->add_flag("!--no-baselines", baselines, "Skip the BM25 and random baselines");

  rlrag::ServiceConfig sc;
  std::string host;
  std::optional<int> port;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", o.config, "Service config JSON");
  serve->add_option("--corpus", o.corpus, "Corpus JSONL");
  serve->add_option("--tasks", o.tasks, "Tasks JSONL; matching queries get rewards");
  serve->add_option("--checkpoint", o.checkpoint, "Trained net");
  AddReasonerOptions(serve, o);
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--episodes", sc.episodes_path, "Episode log")->default_val("episodes.jsonl");
  serve->add_option("--feedback", sc.feedback_path, "Feedback log")->default_val("feedback.jsonl");
  serve->add_option("--metrics", sc.metrics_path, "Training metrics CSV");

  FeedbackTrainOptions ft;
  auto* feedback_train =
      app.add_subcommand("feedback-train", "Fit the reward model to stored ratings");
  add_common(feedback_train);
  feedback_train->add_option("--episodes", ft.episodes, "Episode log")->required();
  feedback_train->add_option("--feedback", ft.feedback, "Feedback log")->required();
  feedback_train->add_option("--epochs", ft.epochs);
  feedback_train->add_option("--lr", ft.lr);
  feedback_train->add_option("--hidden", ft.hidden);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*generate) return RunGenerate(o, gen);
    if (*index) return RunIndex(o);
    if (*oracle) return RunOracle(o);
    if (*train) return RunTrain(o, tr);
    if (*eval) return RunEval(o, with_traces, baselines);
    if (*serve) return RunServe(o, sc, host, port);
    if (*feedback_train) return RunFeedbackTrain(o, ft);
  } catch (const Error& e) {
    PrintError(rlrag::ErrorCodeName(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    PrintError("internal", e.what());
    return 1;
  }
  return 1;
}
