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

#ifndef RLRAG_REASONER_HPP_
#define RLRAG_REASONER_HPP_

#include <chrono>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlrag/prompting.hpp"

namespace rlrag {

inline constexpr std::string_view kUnknownAnswer = "UNKNOWN";

// One benchmark question with its ground truth.
struct TaskInstance {
  std::string instance_id;
  std::string task_description;
  std::string query;
  std::string gold_answer;
  std::vector<std::string> gold_doc_ids;         // sorted, non-empty
  std::map<std::string, std::string> damaging;   // doc id -> distractor answer

  bool has_ground_truth() const { return !gold_doc_ids.empty(); }
};

// Throws Error(kSchema) when the instance breaks its invariants.
void ValidateInstance(const TaskInstance& instance);

nlohmann::json InstanceToJson(const TaskInstance& instance);
TaskInstance InstanceFromJson(const nlohmann::json& j, const std::string& where);
std::vector<TaskInstance> ParseTasksJsonl(std::string_view content,
                                          const std::string& source = "<memory>");
std::vector<TaskInstance> ReadTasksJsonl(const std::string& path);
std::string WriteTasksJsonl(std::span<const TaskInstance> instances);

enum class BackendKind { kSimulated, kHttp };
std::string_view BackendName(BackendKind kind);

struct ReasonerResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  BackendKind backend = BackendKind::kSimulated;
};

class Reasoner {
 public:
  virtual ~Reasoner() = default;

  // `support` lists the doc ids actually present in `prompt` (after any
  // budget drops), in prompt order.
  virtual ReasonerResponse Answer(const AggregatedPrompt& prompt,
                                  const TaskInstance& instance,
                                  std::span<const std::string> support) = 0;

  virtual BackendKind kind() const = 0;
};

// Deterministic stand-in for an LLM:
//   1. any damaging doc in the support -> the distractor of the damaging doc
//      with the smallest id (a hallucination);
//   2. otherwise, all gold docs present -> the gold answer;
//   3. otherwise -> "UNKNOWN".
// Instances without ground truth always get "UNKNOWN".
class SimulatedReasoner final : public Reasoner {
 public:
  ReasonerResponse Answer(const AggregatedPrompt& prompt,
                          const TaskInstance& instance,
                          std::span<const std::string> support) override;
  BackendKind kind() const override { return BackendKind::kSimulated; }

  static std::string Decide(const TaskInstance& instance,
                            std::span<const std::string> support);
};

struct HttpReasonerConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  double timeout_seconds = 30.0;
  // Falls back to the RLRAG_API_KEY environment variable when empty.
  std::string api_key;
};

nlohmann::json HttpReasonerConfigToJson(const HttpReasonerConfig& config);
HttpReasonerConfig HttpReasonerConfigFromJson(const nlohmann::json& j);

// Chat-completion client. Only the final prompt text leaves the process;
// the instance's ground truth is never sent.
class HttpReasoner final : public Reasoner {
 public:
  explicit HttpReasoner(HttpReasonerConfig config);

  ReasonerResponse Answer(const AggregatedPrompt& prompt,
                          const TaskInstance& instance,
                          std::span<const std::string> support) override;
  BackendKind kind() const override { return BackendKind::kHttp; }

  // The exact request body sent for `prompt`.
  nlohmann::json BuildRequest(const AggregatedPrompt& prompt) const;
  // Extracts choices[0].message.content; throws ReasonerError on a
  // malformed body.
  static std::string ParseResponse(int status, const std::string& body);

  const HttpReasonerConfig& config() const { return config_; }

 private:
  HttpReasonerConfig config_;
};

}  // namespace rlrag

#endif  // RLRAG_REASONER_HPP_
