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

#include "rlrag/reasoner.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "rlrag/error.hpp"
#include "rlrag/io.hpp"

namespace rlrag {

std::string_view BackendName(BackendKind kind) {
  return kind == BackendKind::kHttp ? "http" : "simulated";
}

void ValidateInstance(const TaskInstance& instance) {
  auto fail = [&](std::string_view what) {
    throw Error(ErrorCode::kSchema,
                fmt::format("instance '{}': {}", instance.instance_id, what));
  };
  if (instance.instance_id.empty()) fail("empty instance_id");
  if (instance.gold_doc_ids.empty()) fail("gold_doc_ids is empty");
  if (!std::is_sorted(instance.gold_doc_ids.begin(),
                      instance.gold_doc_ids.end()) ||
      std::adjacent_find(instance.gold_doc_ids.begin(),
                         instance.gold_doc_ids.end()) !=
          instance.gold_doc_ids.end()) {
    fail("gold_doc_ids must be a set");
  }
  for (const auto& [id, answer] : instance.damaging) {
    if (std::binary_search(instance.gold_doc_ids.begin(),
                           instance.gold_doc_ids.end(), id)) {
      fail(fmt::format("doc '{}' is both gold and damaging", id));
    }
    if (answer == instance.gold_answer) {
      fail(fmt::format("distractor for '{}' equals the gold answer", id));
    }
  }
}

nlohmann::json InstanceToJson(const TaskInstance& instance) {
  return {{"instance_id", instance.instance_id},
          {"task_description", instance.task_description},
          {"query", instance.query},
          {"gold_answer", instance.gold_answer},
          {"gold_doc_ids", instance.gold_doc_ids},
          {"damaging", instance.damaging}};
}

TaskInstance InstanceFromJson(const nlohmann::json& j, const std::string& where) {
  RequireOnlyKeys(j,
                  {"instance_id", "task_description", "query", "gold_answer",
                   "gold_doc_ids", "damaging"},
                  where);
  TaskInstance inst;
  try {
    inst.instance_id = j.at("instance_id").get<std::string>();
    inst.task_description = j.at("task_description").get<std::string>();
    inst.query = j.at("query").get<std::string>();
    inst.gold_answer = j.at("gold_answer").get<std::string>();
    inst.gold_doc_ids = j.at("gold_doc_ids").get<std::vector<std::string>>();
    if (j.contains("damaging")) {
      inst.damaging = j["damaging"].get<std::map<std::string, std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("{}: {}", where, e.what()));
  }
  std::sort(inst.gold_doc_ids.begin(), inst.gold_doc_ids.end());
  ValidateInstance(inst);
  return inst;
}

std::vector<TaskInstance> ParseTasksJsonl(std::string_view content,
                                          const std::string& source) {
  std::vector<TaskInstance> out;
  ForEachJsonLine(content, source, [&](const nlohmann::json& j,
                                        std::size_t line) {
    out.push_back(InstanceFromJson(j, fmt::format("{}:{}", source, line)));
  });
  return out;
}

std::vector<TaskInstance> ReadTasksJsonl(const std::string& path) {
  return ParseTasksJsonl(ReadFile(path), path);
}

std::string WriteTasksJsonl(std::span<const TaskInstance> instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += InstanceToJson(inst).dump();
    out += '\n';
  }
  return out;
}

std::string SimulatedReasoner::Decide(const TaskInstance& instance,
                                      std::span<const std::string> support) {
  if (!instance.has_ground_truth()) return std::string(kUnknownAnswer);
  // `damaging` is ordered by id, so the first hit is the smallest id.
  for (const auto& [id, distractor] : instance.damaging) {
    if (std::find(support.begin(), support.end(), id) != support.end()) {
      return distractor;
    }
  }
  const bool all_gold = std::all_of(
      instance.gold_doc_ids.begin(), instance.gold_doc_ids.end(),
      [&](const std::string& id) {
        return std::find(support.begin(), support.end(), id) != support.end();
      });
  return all_gold ? instance.gold_answer : std::string(kUnknownAnswer);
}

ReasonerResponse SimulatedReasoner::Answer(const AggregatedPrompt& /*prompt*/,
                                           const TaskInstance& instance,
                                           std::span<const std::string> support) {
  return ReasonerResponse{Decide(instance, support), std::chrono::milliseconds(0),
                          BackendKind::kSimulated};
}

}  // namespace rlrag
