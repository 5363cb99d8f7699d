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

#ifndef RLRAG_SERVICE_HPP_
#define RLRAG_SERVICE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlrag/corpus.hpp"
#include "rlrag/episode.hpp"
#include "rlrag/episode_store.hpp"
#include "rlrag/prompting.hpp"
#include "rlrag/reasoner.hpp"
#include "rlrag/reward.hpp"
#include "rlrag/tinynn.hpp"

namespace httplib {
class Server;
}

namespace rlrag {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string corpus_path;
  std::string tasks_path;       // optional: queries matching a task get rewards
  std::string checkpoint_path;
  std::string episodes_path;    // episode log (JSONL)
  std::string feedback_path;    // feedback log (JSONL)
  std::string metrics_path;     // training metrics CSV, optional
  BackendKind backend = BackendKind::kSimulated;
  HttpReasonerConfig reasoner;
  rl::EpisodeConfig episode;
};

nlohmann::json ServiceConfigToJson(const ServiceConfig& config);
ServiceConfig ServiceConfigFromJson(const nlohmann::json& j);
// Throws Error(kNotFound) naming the first configured path that is missing.
void CheckServicePaths(const ServiceConfig& config);

struct HttpResult {
  int status = 200;
  nlohmann::json body;
};

// HTTP API over one index, one reasoner and the two stores. The handlers
// are plain functions of (request JSON) -> HttpResult so they can be driven
// without sockets; Listen() mounts them on a server.
class Service {
 public:
  Service(InvertedIndex index, std::vector<TaskInstance> tasks,
          std::vector<PromptTemplate> templates, rl::EpisodeConfig episode_config,
          std::unique_ptr<Reasoner> reasoner, EpisodeStore& episodes,
          FeedbackStore& feedback, std::string metrics_path = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Replaces the policy snapshot; in-flight queries keep the old one.
  void LoadSnapshot(nn::Mlp net);
  bool has_snapshot() const;

  HttpResult Query(const nlohmann::json& body);
  HttpResult Feedback(const nlohmann::json& body);
  HttpResult ListEpisodes(std::int64_t limit, std::int64_t offset) const;
  HttpResult GetEpisode(const std::string& episode_id) const;
  HttpResult Metrics() const;
  HttpResult Health() const;

  // Binds and serves until Stop(). port 0 picks a free port.
  bool Bind(const std::string& host, int port);
  int bound_port() const { return port_; }
  void ServeForever();
  void Stop();

 private:
  std::shared_ptr<const nn::Mlp> Snapshot() const;
  nlohmann::json EpisodeDetail(const EpisodeTrace& trace) const;
  nlohmann::json EpisodeSummary(const EpisodeTrace& trace) const;

  InvertedIndex index_;
  std::vector<TaskInstance> tasks_;
  std::map<std::string, std::size_t> task_by_id_;
  std::map<std::string, std::size_t> task_by_query_;
  std::vector<PromptTemplate> templates_;
  rl::EpisodeConfig episode_config_;
  std::unique_ptr<Reasoner> reasoner_;
  std::mutex reasoner_mu_;
  EpisodeStore& episodes_;
  FeedbackStore& feedback_;
  std::string metrics_path_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const nn::Mlp> snapshot_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = -1;
};

}  // namespace rlrag

#endif  // RLRAG_SERVICE_HPP_
