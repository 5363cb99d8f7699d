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

#ifndef RLRAG_EVALUATION_HPP_
#define RLRAG_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlrag/episode.hpp"
#include "rlrag/prompting.hpp"
#include "rlrag/reasoner.hpp"
#include "rlrag/tinynn.hpp"
#include "rlrag/trace.hpp"

namespace rlrag::rl {

struct EvalSummary {
  std::string policy;
  std::size_t episodes = 0;
  std::size_t rewarded = 0;  // episodes with a reward (ground truth)
  double mean_reward = 0.0;
  double hallucination_rate = 0.0;
  double damaging_rate = 0.0;  // episodes whose context held a damaging doc
  std::vector<EpisodeTrace> traces;
};

// Rates are over rewarded episodes; damaging_rate is over all episodes.
EvalSummary Summarize(std::string policy, std::vector<EpisodeTrace> traces);
nlohmann::json SummaryToJson(const EvalSummary& summary, bool with_traces = false);

// Greedy eval-mode episodes under `net`.
EvalSummary EvaluatePolicy(const nn::Mlp& net, std::span<const EpisodeEnv> envs,
                           std::span<const PromptTemplate> templates, Reasoner& reasoner);

// Frozen baseline: one template, the BM25 top k_max of the pool.
EvalSummary EvaluateBm25TopK(std::span<const EpisodeEnv> envs,
                             std::span<const PromptTemplate> templates, Reasoner& reasoner,
                             int template_id = 0);

// Uniformly random legal action at every step.
EvalSummary EvaluateRandomPolicy(std::span<const EpisodeEnv> envs,
                                 std::span<const PromptTemplate> templates,
                                 Reasoner& reasoner, std::uint64_t seed);

std::vector<EpisodeEnv> MakeEnvs(const InvertedIndex& index,
                                 std::span<const TaskInstance> instances,
                                 const EpisodeConfig& config);

}  // namespace rlrag::rl

#endif  // RLRAG_EVALUATION_HPP_
