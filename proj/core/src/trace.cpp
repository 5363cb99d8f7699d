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

#include "rlrag/trace.hpp"

#include <fmt/format.h>

#include "rlrag/error.hpp"

namespace rlrag {

std::string_view RewardKindName(RewardKind kind) {
  switch (kind) {
    case RewardKind::kCorrect: return "correct";
    case RewardKind::kPartial: return "partial";
    case RewardKind::kAbstain: return "abstain";
    case RewardKind::kHallucination: return "hallucination";
    case RewardKind::kHuman: return "human";
  }
  return "abstain";
}

std::string_view RewardSourceName(RewardSource source) {
  switch (source) {
    case RewardSource::kProgrammatic: return "programmatic";
    case RewardSource::kRewardModel: return "reward_model";
    case RewardSource::kHuman: return "human";
  }
  return "programmatic";
}

RewardKind ParseRewardKind(std::string_view name) {
  for (auto k : {RewardKind::kCorrect, RewardKind::kPartial, RewardKind::kAbstain,
                 RewardKind::kHallucination, RewardKind::kHuman}) {
    if (RewardKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kSchema, fmt::format("unknown reward kind '{}'", name));
}

RewardSource ParseRewardSource(std::string_view name) {
  for (auto s : {RewardSource::kProgrammatic, RewardSource::kRewardModel,
                 RewardSource::kHuman}) {
    if (RewardSourceName(s) == name) return s;
  }
  throw Error(ErrorCode::kSchema,
              fmt::format("unknown reward source '{}'", name));
}

nlohmann::json TraceToJson(const EpisodeTrace& t) {
  nlohmann::json q = nlohmann::json::array();
  for (const auto& step : t.q_values) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& av : step.values) {
      values.push_back(nlohmann::json::array({av.action, av.q}));
    }
    q.push_back({{"values", std::move(values)}, {"chosen", step.chosen}});
  }
  nlohmann::json j = {{"episode_id", t.episode_id},
                      {"instance_id", t.instance_id},
                      {"task_description", t.task_description},
                      {"query", t.query},
                      {"template_id", nullptr},
                      {"support", t.support},
                      {"support_scores", t.support_scores},
                      {"pool_max_score", t.pool_max_score},
                      {"pool_size", t.pool_size},
                      {"dropped", t.dropped},
                      {"prompt", t.prompt},
                      {"response", nullptr},
                      {"reward", nullptr},
                      {"q_values", std::move(q)},
                      {"damaging_included", t.damaging_included}};
  if (t.template_id) j["template_id"] = *t.template_id;
  if (t.response) {
    j["response"] = {{"text", t.response->text},
                     {"latency_ms", t.response->latency.count()},
                     {"backend", BackendName(t.response->backend)}};
  }
  if (t.reward) {
    j["reward"] = {{"value", t.reward->value},
                   {"kind", RewardKindName(t.reward->kind)},
                   {"source", RewardSourceName(t.reward->source)}};
  }
  return j;
}

EpisodeTrace TraceFromJson(const nlohmann::json& j) {
  try {
    EpisodeTrace t;
    t.episode_id = j.at("episode_id").get<std::string>();
    t.instance_id = j.at("instance_id").get<std::string>();
    t.task_description = j.at("task_description").get<std::string>();
    t.query = j.at("query").get<std::string>();
    if (!j.at("template_id").is_null()) {
      t.template_id = j["template_id"].get<int>();
    }
    t.support = j.at("support").get<std::vector<std::string>>();
    t.support_scores = j.at("support_scores").get<std::vector<double>>();
    t.pool_max_score = j.at("pool_max_score").get<double>();
    t.pool_size = j.at("pool_size").get<std::size_t>();
    t.dropped = j.at("dropped").get<std::vector<std::string>>();
    t.prompt = j.at("prompt").get<std::string>();
    if (const auto& r = j.at("response"); !r.is_null()) {
      ReasonerResponse resp;
      resp.text = r.at("text").get<std::string>();
      resp.latency = std::chrono::milliseconds(r.at("latency_ms").get<long>());
      resp.backend = r.at("backend").get<std::string>() == "http"
                         ? BackendKind::kHttp
                         : BackendKind::kSimulated;
      t.response = std::move(resp);
    }
    if (const auto& r = j.at("reward"); !r.is_null()) {
      t.reward = RewardOutcome{r.at("value").get<double>(),
                               ParseRewardKind(r.at("kind").get<std::string>()),
                               ParseRewardSource(r.at("source").get<std::string>())};
    }
    for (const auto& step : j.at("q_values")) {
      StepValues sv;
      sv.chosen = step.at("chosen").get<std::size_t>();
      for (const auto& av : step.at("values")) {
        sv.values.push_back(
            ActionValue{av.at(0).get<std::string>(), av.at(1).get<double>()});
      }
      t.q_values.push_back(std::move(sv));
    }
    t.damaging_included = j.at("damaging_included").get<bool>();
    if (t.support.size() != t.support_scores.size()) {
      throw Error(ErrorCode::kSchema, "support and support_scores differ in size");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("malformed trace: {}", e.what()));
  }
}

}  // namespace rlrag
