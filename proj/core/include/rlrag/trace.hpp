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

#ifndef RLRAG_TRACE_HPP_
#define RLRAG_TRACE_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlrag/reasoner.hpp"

namespace rlrag {

enum class RewardKind { kCorrect, kPartial, kAbstain, kHallucination, kHuman };
enum class RewardSource { kProgrammatic, kRewardModel, kHuman };

std::string_view RewardKindName(RewardKind kind);
std::string_view RewardSourceName(RewardSource source);
RewardKind ParseRewardKind(std::string_view name);
RewardSource ParseRewardSource(std::string_view name);

// value is 1 for correct, 0 for abstain, -1 for hallucination, in (0, 1)
// for partial, and in [-1, 1] for human ratings.
struct RewardOutcome {
  double value = 0.0;
  RewardKind kind = RewardKind::kAbstain;
  RewardSource source = RewardSource::kProgrammatic;

  friend bool operator==(const RewardOutcome&, const RewardOutcome&) = default;
};

struct ActionValue {
  std::string action;  // "T<i>", "D<pool position>" or "STOP"
  double q = 0.0;
};

struct StepValues {
  std::vector<ActionValue> values;
  std::size_t chosen = 0;
};

// One full pass: template choice, support set, final prompt, answer, reward.
struct EpisodeTrace {
  std::string episode_id;
  std::string instance_id;
  std::string task_description;
  std::string query;
  std::optional<int> template_id;
  std::vector<std::string> support;     // selection order
  std::vector<double> support_scores;   // raw BM25, parallel to support
  double pool_max_score = 0.0;
  std::size_t pool_size = 0;
  std::vector<std::string> dropped;     // removed by the context budget
  std::string prompt;
  std::optional<ReasonerResponse> response;
  std::optional<RewardOutcome> reward;
  std::vector<StepValues> q_values;
  bool damaging_included = false;

  bool complete() const { return template_id.has_value() && response.has_value(); }
};

nlohmann::json TraceToJson(const EpisodeTrace& trace);
EpisodeTrace TraceFromJson(const nlohmann::json& j);

}  // namespace rlrag

#endif  // RLRAG_TRACE_HPP_
