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

#include "rlrag/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

#include "rlrag/rng.hpp"

namespace rlrag::rl {

EvalSummary Summarize(std::string policy, std::vector<EpisodeTrace> traces) {
  EvalSummary s;
  s.policy = std::move(policy);
  s.episodes = traces.size();
  double sum = 0.0;
  std::size_t hallucinations = 0;
  std::size_t damaging = 0;
  for (const auto& t : traces) {
    if (t.damaging_included) ++damaging;
    if (!t.reward) continue;
    ++s.rewarded;
    sum += t.reward->value;
    if (t.reward->kind == RewardKind::kHallucination) ++hallucinations;
  }
  if (s.rewarded > 0) {
    s.mean_reward = sum / static_cast<double>(s.rewarded);
    s.hallucination_rate = static_cast<double>(hallucinations) / static_cast<double>(s.rewarded);
  }
  if (s.episodes > 0) {
    s.damaging_rate = static_cast<double>(damaging) / static_cast<double>(s.episodes);
  }
  s.traces = std::move(traces);
  return s;
}

nlohmann::json SummaryToJson(const EvalSummary& s, bool with_traces) {
  nlohmann::json j = {{"policy", s.policy},
                      {"episodes", s.episodes},
                      {"rewarded", s.rewarded},
                      {"mean_reward", s.mean_reward},
                      {"hallucination_rate", s.hallucination_rate},
                      {"damaging_rate", s.damaging_rate}};
  if (with_traces) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : s.traces) arr.push_back(TraceToJson(t));
    j["traces"] = std::move(arr);
  }
  return j;
}

EvalSummary EvaluatePolicy(const nn::Mlp& net, std::span<const EpisodeEnv> envs,
                           std::span<const PromptTemplate> templates, Reasoner& reasoner) {
  std::vector<EpisodeTrace> traces;
  for (std::size_t i = 0; i < envs.size(); ++i) {
    RunOptions opts{Mode::kEval, 0.0, nullptr, fmt::format("eval-{:06d}", i)};
    traces.push_back(RunEpisode(net, envs[i], templates, reasoner, opts).trace);
  }
  return Summarize("dqn", std::move(traces));
}

EvalSummary EvaluateBm25TopK(std::span<const EpisodeEnv> envs,
                             std::span<const PromptTemplate> templates, Reasoner& reasoner,
                             int template_id) {
  std::vector<EpisodeTrace> traces;
  for (std::size_t i = 0; i < envs.size(); ++i) {
    const std::size_t k = std::min(envs[i].config().k_max, envs[i].candidates().size());
    std::vector<std::size_t> positions(k);
    std::iota(positions.begin(), positions.end(), 0);
    EpisodeTrace t = ExecuteChoice(envs[i], templates, reasoner, template_id, positions);
    t.episode_id = fmt::format("bm25-{:06d}", i);
    traces.push_back(std::move(t));
  }
  return Summarize("bm25-top-k", std::move(traces));
}

EvalSummary EvaluateRandomPolicy(std::span<const EpisodeEnv> envs,
                                 std::span<const PromptTemplate> templates,
                                 Reasoner& reasoner, std::uint64_t seed) {
  // With epsilon 1 the net's values are never consulted for the choice.
  const nn::Mlp net = nn::Mlp::Zeros({kFeatureCount, 1});
  Rng rng(seed);
  std::vector<EpisodeTrace> traces;
  for (std::size_t i = 0; i < envs.size(); ++i) {
    RunOptions opts{Mode::kTrain, 1.0, &rng, fmt::format("random-{:06d}", i)};
    traces.push_back(RunEpisode(net, envs[i], templates, reasoner, opts).trace);
  }
  return Summarize("random", std::move(traces));
}

std::vector<EpisodeEnv> MakeEnvs(const InvertedIndex& index,
                                 std::span<const TaskInstance> instances,
                                 const EpisodeConfig& config) {
  std::vector<EpisodeEnv> envs;
  envs.reserve(instances.size());
  for (const auto& inst : instances) envs.emplace_back(index, inst, config);
  return envs;
}

}  // namespace rlrag::rl
