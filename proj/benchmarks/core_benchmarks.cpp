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

// Microbenchmarks for the inner loops of training: BM25 retrieval, the MLP
// passes, one DQN update and one full episode.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "rlrag/benchmark.hpp"
#include "rlrag/corpus.hpp"
#include "rlrag/dqn.hpp"
#include "rlrag/episode.hpp"
#include "rlrag/evaluation.hpp"
#include "rlrag/prompting.hpp"
#include "rlrag/reasoner.hpp"
#include "rlrag/replay.hpp"
#include "rlrag/rng.hpp"
#include "rlrag/tinynn.hpp"
#include "rlrag/trainer.hpp"

namespace {

using namespace rlrag;

struct SeedSeven {
  Benchmark bench = GenerateBenchmark(BenchmarkParams{});
  InvertedIndex index = InvertedIndex::Build(bench.docs);
  std::vector<std::vector<std::string>> queries;

  SeedSeven() {
    for (const auto& t : bench.instances) queries.push_back(Tokenize(t.query));
  }
};

const SeedSeven& Data() {
  static const SeedSeven data;
  return data;
}

void BM_Bm25TopN(benchmark::State& state) {
  const auto& d = Data();
  const auto n = static_cast<std::size_t>(state.range(0));
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(d.index.TopN(d.queries[q], n));
    q = (q + 1) % d.queries.size();
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["docs"] = static_cast<double>(d.index.doc_count());
}
BENCHMARK(BM_Bm25TopN)->Arg(10)->Arg(100);

void BM_IndexBuild(benchmark::State& state) {
  const auto& d = Data();
  for (auto _ : state) benchmark::DoNotOptimize(InvertedIndex::Build(d.bench.docs));
}
BENCHMARK(BM_IndexBuild)->Unit(benchmark::kMillisecond);

std::vector<double> RandomInput(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

void BM_MlpForward(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const nn::Mlp net = nn::Mlp::Init({rl::kFeatureCount, h, h / 2, 1}, 1);
  Rng rng(1);
  const auto x = RandomInput(rl::kFeatureCount, rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.ForwardScalar(x));
}
BENCHMARK(BM_MlpForward)->Arg(32)->Arg(64)->Arg(128);

void BM_MlpBackward(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const nn::Mlp net = nn::Mlp::Init({rl::kFeatureCount, h, h / 2, 1}, 1);
  Rng rng(1);
  const auto x = RandomInput(rl::kFeatureCount, rng);
  const std::vector<double> up{1.0};
  for (auto _ : state) benchmark::DoNotOptimize(net.Backward(x, up));
}
BENCHMARK(BM_MlpBackward)->Arg(32)->Arg(64)->Arg(128);

void BM_DqnUpdate(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  nn::Mlp net = rl::MakeQNetwork(rl::TrainConfig{});
  const nn::Mlp target = net;
  Rng rng(3);
  std::vector<rl::Transition> ts;
  for (std::size_t i = 0; i < batch; ++i) {
    rl::Transition t;
    t.features = RandomInput(rl::kFeatureCount, rng);
    t.terminal = i % 4 == 0;
    if (t.terminal) {
      t.reward = rng.uniform(-1.0, 1.0);
    } else {
      for (int a = 0; a < 8; ++a) t.next.push_back(RandomInput(rl::kFeatureCount, rng));
    }
    ts.push_back(std::move(t));
  }
  std::vector<const rl::Transition*> ptrs;
  for (const auto& t : ts) ptrs.push_back(&t);
  for (auto _ : state) {
    // A tiny rate keeps the weights (and the cost per update) stable.
    benchmark::DoNotOptimize(rl::DqnUpdate(net, target, ptrs, 0.99, 1e-9));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_DqnUpdate)->Arg(32);

void BM_ReplaySample(benchmark::State& state) {
  rl::ReplayBuffer buffer(10000);
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) buffer.Push(rl::Transition{{1.0}, 0.0, {}, true});
  for (auto _ : state) benchmark::DoNotOptimize(buffer.Sample(32, rng));
}
BENCHMARK(BM_ReplaySample);

void BM_RunEpisode(benchmark::State& state) {
  const auto& d = Data();
  const auto envs = rl::MakeEnvs(d.index, d.bench.instances, rl::TrainConfig{}.episode);
  const auto templates = DefaultTemplates();
  const nn::Mlp net = rl::MakeQNetwork(rl::TrainConfig{});
  SimulatedReasoner reasoner;
  Rng rng(11);
  rl::RunOptions opts;
  opts.mode = state.range(0) == 0 ? rl::Mode::kEval : rl::Mode::kTrain;
  opts.epsilon = opts.mode == rl::Mode::kTrain ? 0.5 : 0.0;
  opts.rng = &rng;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rl::RunEpisode(net, envs[i], templates, reasoner, opts));
    i = (i + 1) % envs.size();
  }
  state.SetLabel(opts.mode == rl::Mode::kTrain ? "train eps=0.5" : "eval");
}
BENCHMARK(BM_RunEpisode)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
