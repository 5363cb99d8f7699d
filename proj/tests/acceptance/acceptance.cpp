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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <httplib.h>

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "bm25_reference.hpp"
#include "rlrag/benchmark.hpp"
#include "rlrag/dqn.hpp"
#include "rlrag/error.hpp"
#include "rlrag/evaluation.hpp"
#include "rlrag/io.hpp"
#include "rlrag/oracle.hpp"
#include "rlrag/replay.hpp"
#include "rlrag/reward.hpp"
#include "rlrag/rng.hpp"
#include "rlrag/service.hpp"
#include "rlrag/tinynn.hpp"
#include "rlrag/trainer.hpp"
#include "test_support.hpp"

namespace {

using namespace rlrag;
using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::string detail;
  void Require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int failures = 0;

// `prior_secs` is work done before the call on this criterion's behalf.
void Report(const std::string& name, const std::function<Check()>& fn, double prior_secs = 0.0) {
  const auto start = Clock::now();
  Check c;
  try {
    c = fn();
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail = fmt::format("threw: {}", e.what());
  }
  const double secs = prior_secs + std::chrono::duration<double>(Clock::now() - start).count();
  if (!c.ok) ++failures;
  std::printf("%s %s (%.2f s): %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), secs,
              c.detail.c_str());
  std::fflush(stdout);
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

Check Numerics() {
  Check c;
  const auto start = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t in = 1 + rng.uniform_index(16);
    const std::size_t hidden = 1 + rng.uniform_index(32);
    const std::size_t out = 1 + rng.uniform_index(8);
    const nn::Mlp net = nn::Mlp::Init({in, hidden, out}, 1000 + static_cast<std::uint64_t>(trial));
    std::vector<double> x(in), up(out);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    for (double& v : up) v = rng.uniform(-1.0, 1.0);
    const auto objective = [&](const nn::Mlp& m) {
      const auto y = m.Forward(x);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * up[i];
      return s;
    };
    const auto analytic = net.Backward(x, up).Flatten();
    auto params = net.FlatParameters();
    nn::Mlp probe = net;
    const double h = 1e-5;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double keep = params[i];
      params[i] = keep + h;
      probe.SetFlatParameters(params);
      const double fp = objective(probe);
      params[i] = keep - h;
      probe.SetFlatParameters(params);
      const double fm = objective(probe);
      params[i] = keep;
      const double numeric = (fp - fm) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
  }
  const double secs = Seconds(start);
  c.detail = fmt::format("max relative error {:.3g} over 100 nets", worst);
  c.Require(worst < 1e-4, "relative error >= 1e-4");
  c.Require(secs < 10.0, "runtime >= 10 s");
  return c;
}

Check OracleEquivalence() {
  Check c;
  const auto start = Clock::now();
  Rng rng(202);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  std::size_t mismatches = 0, ties = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Document> docs;
    const auto n_docs = 1 + rng.uniform_index(50);
    for (std::size_t i = 0; i < n_docs; ++i) {
      std::string text;
      const auto len = rng.uniform_index(8);
      for (std::size_t k = 0; k < len; ++k) text += vocab[rng.uniform_index(vocab.size())] + " ";
      docs.push_back(Document::Make(fmt::format("doc{:05d}", rng.uniform_index(1000) * 100 + i), text));
    }
    std::vector<std::string> q;
    const auto qlen = 1 + rng.uniform_index(6);
    for (std::size_t k = 0; k < qlen; ++k) q.push_back(vocab[rng.uniform_index(vocab.size())]);
    const auto index = InvertedIndex::Build(docs);
    const auto expected = testing::BruteForceRank(index.documents(), q);
    const std::size_t n = 1 + rng.uniform_index(n_docs);
    const auto pool = index.TopN(q, n);
    const std::size_t want = std::min(n, expected.size());
    bool same = pool.size() == want;
    for (std::size_t i = 0; same && i < want; ++i) {
      same = pool.entries[i].doc_id == expected[i].doc_id &&
             pool.entries[i].score == expected[i].score;
    }
    for (std::size_t i = 1; i < expected.size(); ++i) ties += expected[i].score == expected[i - 1].score;
    mismatches += same ? 0 : 1;
  }
  const double secs = Seconds(start);
  c.detail = fmt::format("{} of 200 cases differ; {} tied pairs checked", mismatches, ties);
  c.Require(mismatches == 0, "ranking mismatch");
  c.Require(secs < 5.0, "runtime >= 5 s");
  return c;
}

Check BellmanFixtures() {
  Check c;
  nn::Mlp target = nn::Mlp::Zeros({1, 1});
  target.mutable_layers()[0].weights = {1.0};
  const rl::Transition terminal{{0.5}, 1.0, {}, true};
  const rl::Transition boot{{0.5}, 0.0, {{2.0}, {1.0}}, false};
  const std::vector<const rl::Transition*> batch{&terminal, &boot};
  const auto y = rl::BellmanTargets(batch, target, 0.9);
  c.Require(y[0] == 1.0, fmt::format("terminal target {}", y[0]));
  c.Require(std::abs(y[1] - 1.8) < 1e-12, fmt::format("bootstrapped target {}", y[1]));

  // Q(x) = w x with the bias pinned to zero, x = 2, w = 0.25, y = 1.
  // loss = (2w - 1)^2, dL/dw = 4 (2w - 1) = -2, so w' = 0.25 + 0.1 * 2.
  nn::Mlp net = nn::Mlp::Zeros({1, 1});
  net.mutable_layers()[0].weights = {0.25};
  const rl::Transition t{{2.0}, 1.0, {}, true};
  const std::vector<const rl::Transition*> one{&t};
  auto lg = rl::DqnLoss(net, net, one, 0.99);
  lg.grads.biases[0][0] = 0.0;
  net.SgdStep(lg.grads, 0.1);
  const double w = net.layers()[0].weights[0];
  c.Require(std::abs(lg.loss - 0.25) < 1e-12, fmt::format("loss {}", lg.loss));
  c.Require(std::abs(w - 0.45) < 1e-9, fmt::format("updated weight {}", w));

  // Same step through DqnUpdate on a net whose only live parameter is w.
  nn::Mlp full = nn::Mlp::Zeros({1, 1});
  full.mutable_layers()[0].weights = {0.25};
  rl::DqnUpdate(full, full, one, 0.99, 0.1);
  c.Require(std::abs(full.layers()[0].weights[0] - 0.45) < 1e-9, "DqnUpdate weight");
  c.detail = fmt::format("targets [{}, {}], w' = {:.12f}", y[0], y[1], w);
  return c;
}

struct Split {
  Benchmark bench;
  std::vector<TaskInstance> train, eval;
};

Split SeedSevenSplit() {
  Split s;
  s.bench = GenerateBenchmark(BenchmarkParams{});
  s.train.assign(s.bench.instances.begin(), s.bench.instances.begin() + 50);
  s.eval.assign(s.bench.instances.begin() + 50, s.bench.instances.end());
  return s;
}

void LearningEffect() {
  const auto start = Clock::now();
  const Split split = SeedSevenSplit();
  const auto index = InvertedIndex::Build(split.bench.docs);
  const auto templates = DefaultTemplates();
  SimulatedReasoner reasoner;
  const rl::TrainConfig cfg;  // seed 7, max 5000 episodes

  const auto frozen = nlohmann::json::parse(ReadFile(testing::DataPath("oracle_seed7_eval.json")));
  const double oracle = frozen["mean_optimal_reward"].get<double>();
  const auto envs = rl::MakeEnvs(index, split.eval, cfg.episode);
  double recomputed = 0.0;
  for (const auto& env : envs) recomputed += rl::BruteForceOptimum(env, templates, reasoner).reward.value;
  recomputed /= static_cast<double>(envs.size());
  const double oracle_secs = Seconds(start);

  const auto first = rl::Train(index, split.train, cfg, templates, reasoner);
  const auto second = rl::Train(index, split.train, cfg, templates, reasoner);
  const double train_secs = Seconds(start) - oracle_secs;

  const auto dqn = rl::EvaluatePolicy(first.online, envs, templates, reasoner);
  const auto bm25 = rl::EvaluateBm25TopK(envs, templates, reasoner);
  const auto random = rl::EvaluateRandomPolicy(envs, templates, reasoner, cfg.seed);
  const double secs = Seconds(start);
  const double eval_secs = secs - oracle_secs - train_secs;

  std::size_t damaged = 0;
  for (const auto& t : split.eval) damaged += t.damaging.empty() ? 0 : 1;
  const std::string setup = fmt::format(
      "{} docs, {} train / {} eval ({} damaged), {} episodes, converged={}", split.bench.docs.size(),
      split.train.size(), split.eval.size(), damaged, first.metrics.size(), first.converged);

  Report("learning-oracle-baseline", [&] {
    Check c;
    c.detail = fmt::format("frozen oracle mean {:.4f}, recomputed {:.4f}", oracle, recomputed);
    c.Require(oracle == recomputed, "oracle drifted from the frozen baseline");
    c.Require(frozen["instances"] == 20, "frozen baseline is not over the 20 eval instances");
    return c;
  }, oracle_secs);
  Report("learning-a-reward-vs-oracle", [&] {
    Check c;
    c.detail = fmt::format("dqn eval mean {:.4f} vs 0.8 x oracle = {:.4f}; {}", dqn.mean_reward,
                           0.8 * oracle, setup);
    c.Require(dqn.mean_reward >= 0.8 * oracle, "below 0.8 x oracle");
    c.Require(first.metrics.size() <= 5000, "more than 5000 episodes");
    return c;
  }, eval_secs);
  Report("learning-b-hallucination-vs-bm25", [&] {
    Check c;
    c.detail = fmt::format("dqn hallucination rate {:.4f} vs 0.5 x bm25 top-k {:.4f} = {:.4f}",
                           dqn.hallucination_rate, bm25.hallucination_rate,
                           0.5 * bm25.hallucination_rate);
    c.Require(dqn.hallucination_rate <= 0.5 * bm25.hallucination_rate, "too many hallucinations");
    c.Require(bm25.hallucination_rate > 0.0, "baseline never hallucinates; criterion is vacuous");
    return c;
  });
  Report("learning-c-reward-vs-random", [&] {
    Check c;
    c.detail = fmt::format("dqn {:.4f} vs random {:.4f} + 0.3", dqn.mean_reward, random.mean_reward);
    c.Require(dqn.mean_reward >= random.mean_reward + 0.3, "margin below 0.3");
    return c;
  });
  Report("learning-determinism-and-budget", [&] {
    Check c;
    const std::string a = rl::MetricsCsv(first.metrics);
    const std::string b = rl::MetricsCsv(second.metrics);
    c.detail = fmt::format("two runs {} ({} bytes of CSV); two trainings took {:.1f} s, {:.1f} s with evaluation",
                           a == b ? "byte-identical" : "differ", a.size(), train_secs, secs);
    c.Require(a == b, "metrics CSV differs between identical runs");
    c.Require(secs < 600.0, "over the 10 minute budget");
    return c;
  }, train_secs);
}

Check Replay() {
  Check c;
  rl::ReplayBuffer buf(1000);
  for (std::size_t i = 0; i < 10000; ++i) {
    buf.Push(rl::Transition{{static_cast<double>(i)}, 0.0, {}, true});
  }
  bool fifo = buf.size() == 1000;
  for (std::size_t i = 0; fifo && i < 1000; ++i) {
    fifo = buf.at(i).features[0] == static_cast<double>(9000 + i);
  }
  c.Require(fifo, "contents are not inserts (9000, 10000]");

  Rng rng(303);
  const int reps = 5000;
  const std::size_t batch = 32;
  std::vector<int> counts(buf.size(), 0);
  bool distinct = true;
  for (int r = 0; r < reps; ++r) {
    const auto idx = buf.SampleIndices(batch, rng);
    distinct &= std::set<std::size_t>(idx.begin(), idx.end()).size() == batch;
    for (auto i : idx) ++counts[i];
  }
  c.Require(distinct, "a batch repeated a slot");
  const double p = static_cast<double>(batch) / 1000.0;
  const double mean = reps * p;
  const double sigma = std::sqrt(reps * p * (1 - p));
  double worst = 0.0;
  for (int k : counts) worst = std::max(worst, std::abs(k - mean) / sigma);
  // 1000 slots: the largest deviation of a fair sampler stays well under 5 sigma.
  c.Require(worst < 5.0, "slot frequency outside 5 sigma");
  double chi2 = 0.0;
  for (int k : counts) chi2 += (k - mean) * (k - mean) / mean;
  // 999 degrees of freedom; mean 999, sd about 45.
  c.Require(chi2 < 999 + 5 * 45, "chi-square too large");
  c.detail = fmt::format("FIFO ok={}, max |z| {:.2f}, chi2 {:.1f} (df 999)", fifo, worst, chi2);
  return c;
}

Check RewardModelFit() {
  Check c;
  const Split split = SeedSevenSplit();
  const auto index = InvertedIndex::Build(split.bench.docs);
  const auto templates = DefaultTemplates();
  SimulatedReasoner reasoner;
  std::vector<RewardExample> examples;
  for (std::size_t i = 0; examples.size() < 20 && i < split.bench.instances.size(); ++i) {
    const auto& inst = split.bench.instances[i];
    const rl::EpisodeEnv env(index, inst, rl::EpisodeConfig{});
    std::vector<std::size_t> pick;
    switch (i % 3) {
      case 0: pick = {0, 1, 2}; break;  // often holds the damaging doc
      case 1: pick = {0}; break;
      default: pick = {env.candidates().size() - 1}; break;
    }
    auto trace = rl::ExecuteChoice(env, templates, reasoner, static_cast<int>(i % 4), pick);
    trace.episode_id = fmt::format("syn-{:02d}", examples.size());
    const Rating rating = trace.reward->kind == RewardKind::kCorrect         ? Rating::kGood
                          : trace.reward->kind == RewardKind::kHallucination ? Rating::kBadHallucination
                                                                              : Rating::kUnsure;
    examples.push_back({{trace.episode_id, rating, "synthetic", 0}, std::move(trace)});
  }
  std::set<int> ratings;
  for (const auto& e : examples) ratings.insert(static_cast<int>(e.feedback.rating));
  const RewardModel zero = RewardModel::Zero();
  bool zero_exact = true;
  for (const auto& e : examples) zero_exact &= PredictReward(zero, e.trace) == 0.0;
  const RewardModel trained = TrainRewardModel(RewardModel::Init(7), examples, 2000, 0.05, 7);
  const double mse = RewardModelMse(trained, examples);
  std::size_t first_below = trained.loss_log.size();
  for (std::size_t i = 0; i < trained.loss_log.size(); ++i) {
    if (trained.loss_log[i] < 0.05) {
      first_below = i + 1;
      break;
    }
  }
  c.detail = fmt::format("{} records over {} rating values, training MSE {:.5f} (below 0.05 from epoch {}), zero model exact={}",
                         examples.size(), ratings.size(), mse, first_below, zero_exact);
  c.Require(examples.size() == 20, "fewer than 20 records");
  c.Require(ratings.size() == 3, "records do not cover all three ratings");
  c.Require(mse < 0.05, "MSE >= 0.05 after 2000 epochs");
  c.Require(zero_exact, "zero model is not exactly 0");
  return c;
}

class FailingReasoner final : public Reasoner {
 public:
  ReasonerResponse Answer(const AggregatedPrompt&, const TaskInstance&,
                          std::span<const std::string>) override {
    throw ReasonerError(500, "stub failure", "stub reasoner returned HTTP 500");
  }
  BackendKind kind() const override { return BackendKind::kHttp; }
};

// Serves `service` on a free port for the duration of `fn`.
void WithServer(Service& service, const std::function<void(httplib::Client&)>& fn) {
  if (!service.Bind("127.0.0.1", 0)) throw Error(ErrorCode::kIo, "cannot bind");
  std::thread th([&] { service.ServeForever(); });
  httplib::Client cli("127.0.0.1", service.bound_port());
  cli.set_read_timeout(10, 0);
  for (int i = 0; i < 100 && !cli.Get("/v1/health"); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  try {
    fn(cli);
  } catch (...) {
    service.Stop();
    th.join();
    throw;
  }
  service.Stop();
  th.join();
}

nlohmann::json Body(const httplib::Result& r) {
  if (!r) throw Error(ErrorCode::kIo, "no HTTP response");
  return nlohmann::json::parse(r->body);
}

Check ServiceContract() {
  Check c;
  BenchmarkParams p;
  p.n_entities = 4;
  p.n_attributes = 5;
  p.n_queries = 6;
  p.damaging_rate = 0.0;
  const Benchmark bench = GenerateBenchmark(p);
  c.Require(bench.docs.size() == 20, "corpus is not 20 docs");
  const auto snapshot = rl::MakeQNetwork(rl::TrainConfig{});

  EpisodeStore episodes;
  FeedbackStore feedback;
  {
    Service service(InvertedIndex::Build(bench.docs), bench.instances, DefaultTemplates(), {},
                    std::make_unique<SimulatedReasoner>(), episodes, feedback);
    service.LoadSnapshot(snapshot);
    WithServer(service, [&](httplib::Client& cli) {
      const auto q = cli.Post("/v1/query",
                              nlohmann::json{{"task_description", "Question Answering"},
                                             {"query", bench.instances[0].query}}
                                  .dump(),
                              "application/json");
      c.Require(q && q->status == 200, "query did not return 200");
      const auto qb = Body(q);
      const std::string id = qb.value("episode_id", "");
      c.Require(!qb["support"].empty(), "empty support list");

      const auto list = Body(cli.Get("/v1/episodes?limit=10&offset=0"));
      c.Require(list["total"] == 1 && list["items"][0]["episode_id"] == id, "list does not show the episode");

      const auto fb = cli.Post("/v1/feedback",
                               nlohmann::json{{"episode_id", id}, {"rating", -1}, {"rater", "qa"}}.dump(),
                               "application/json");
      c.Require(fb && fb->status == 200, "feedback did not return 200");
      const auto again = cli.Post("/v1/feedback",
                                  nlohmann::json{{"episode_id", id}, {"rating", 1}, {"rater", "qa"}}.dump(),
                                  "application/json");
      c.Require(again && again->status == 200, "resubmission did not return 200");
      const auto bad = cli.Post("/v1/feedback",
                                nlohmann::json{{"episode_id", id}, {"rating", 0.5}}.dump(),
                                "application/json");
      c.Require(bad && bad->status == 422, "rating 0.5 was not 422");

      const auto detail = Body(cli.Get("/v1/episodes/" + id));
      c.Require(detail["feedback"].size() == 1 && detail["feedback"][0]["rating"] == 1,
                "re-fetch does not show the single overwritten rating");
      c.Require(detail["human_reward"] == 1.0, "human reward not visible");

      const auto empty = cli.Post("/v1/query", R"({"query": ""})", "application/json");
      c.Require(empty && empty->status == 400, "empty query was not 400");
      const auto missing = cli.Get("/v1/episodes/ep-999999");
      c.Require(missing && missing->status == 404, "unknown episode was not 404");
      const auto metrics = cli.Get("/v1/metrics");
      c.Require(metrics && metrics->status == 200, "metrics did not return 200");
    });
  }
  const std::size_t before = episodes.size();
  {
    Service failing(InvertedIndex::Build(bench.docs), bench.instances, DefaultTemplates(), {},
                    std::make_unique<FailingReasoner>(), episodes, feedback);
    failing.LoadSnapshot(snapshot);
    WithServer(failing, [&](httplib::Client& cli) {
      const auto q = cli.Post("/v1/query", nlohmann::json{{"query", bench.instances[1].query}}.dump(),
                              "application/json");
      c.Require(q && q->status == 502, "reasoner failure was not 502");
      c.Require(episodes.size() == before, "failed query was persisted");
      const auto list = Body(cli.Get("/v1/episodes"));
      c.Require(list["total"] == before, "listing changed after the failure");
    });
  }
  {
    Service cold(InvertedIndex::Build(bench.docs), bench.instances, DefaultTemplates(), {},
                 std::make_unique<SimulatedReasoner>(), episodes, feedback);
    WithServer(cold, [&](httplib::Client& cli) {
      const auto q = cli.Post("/v1/query", nlohmann::json{{"query", bench.instances[1].query}}.dump(),
                              "application/json");
      c.Require(q && q->status == 503, "missing snapshot was not 503");
    });
  }
  c.detail = fmt::format("20-doc corpus; query, list, feedback, re-fetch, 400/404/422/502/503 paths; store size {}",
                         episodes.size());
  return c;
}

}  // namespace

int main() {
  Report("numerics-gradient-check", Numerics);
  Report("bm25-oracle-equivalence", OracleEquivalence);
  Report("bellman-dqn-fixtures", BellmanFixtures);
  LearningEffect();
  Report("replay-buffer", Replay);
  Report("reward-model", RewardModelFit);
  Report("service-contract", ServiceContract);
  std::printf("%d failing criteria\n", failures);
  return failures == 0 ? 0 : 1;
}
