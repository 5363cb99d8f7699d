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

#include <fmt/format.h>
#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "rlrag/error.hpp"
#include "rlrag/reasoner.hpp"

namespace rlrag {
namespace {

constexpr std::size_t kMaxErrorBody = 512;

std::string Truncate(const std::string& body) {
  if (body.size() <= kMaxErrorBody) return body;
  return body.substr(0, kMaxErrorBody) + "...";
}

}  // namespace

nlohmann::json HttpReasonerConfigToJson(const HttpReasonerConfig& config) {
  // The key is deliberately not serialized.
  return {{"base_url", config.base_url},
          {"path", config.path},
          {"model", config.model},
          {"timeout_seconds", config.timeout_seconds}};
}

HttpReasonerConfig HttpReasonerConfigFromJson(const nlohmann::json& j) {
  HttpReasonerConfig c;
  try {
    if (j.contains("base_url")) c.base_url = j["base_url"].get<std::string>();
    if (j.contains("path")) c.path = j["path"].get<std::string>();
    if (j.contains("model")) c.model = j["model"].get<std::string>();
    if (j.contains("timeout_seconds")) {
      c.timeout_seconds = j["timeout_seconds"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema,
                fmt::format("bad reasoner http config: {}", e.what()));
  }
  if (!(c.timeout_seconds > 0)) {
    throw Error(ErrorCode::kSchema, "reasoner timeout must be positive");
  }
  return c;
}

HttpReasoner::HttpReasoner(HttpReasonerConfig config)
    : config_(std::move(config)) {
  if (config_.api_key.empty()) {
    if (const char* key = std::getenv("RLRAG_API_KEY")) config_.api_key = key;
  }
}

nlohmann::json HttpReasoner::BuildRequest(const AggregatedPrompt& prompt) const {
  return {{"model", config_.model},
          {"messages", nlohmann::json::array({{{"role", "user"},
                                               {"content", prompt.final_text}}})}};
}

std::string HttpReasoner::ParseResponse(int status, const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw std::runtime_error("content is not a string");
    return content.get<std::string>();
  } catch (const std::exception& e) {
    throw ReasonerError(status, Truncate(body),
                        fmt::format("malformed chat completion body: {}",
                                    e.what()));
  }
}

ReasonerResponse HttpReasoner::Answer(const AggregatedPrompt& prompt,
                                      const TaskInstance& /*instance*/,
                                      std::span<const std::string> /*support*/) {
  httplib::Client client(config_.base_url);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const std::string payload = BuildRequest(prompt).dump();

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(config_.path, headers, payload, "application/json");
  const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  if (!res) {
    throw ReasonerError(0, "",
                        fmt::format("reasoner request to {}{} failed: {}",
                                    config_.base_url, config_.path,
                                    httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ReasonerError(res->status, Truncate(res->body),
                        fmt::format("reasoner returned HTTP {}", res->status));
  }
  return ReasonerResponse{ParseResponse(res->status, res->body), latency,
                          BackendKind::kHttp};
}

}  // namespace rlrag
