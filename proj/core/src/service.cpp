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

#include "rlrag/service.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "rlrag/error.hpp"
#include "rlrag/io.hpp"
#include "rlrag/trainer.hpp"

namespace rlrag {
namespace {

constexpr std::int64_t kMaxPageSize = 500;
constexpr std::int64_t kDefaultPageSize = 50;
constexpr std::string_view kDefaultTask = "Question Answering";

HttpResult ErrorResult(int status, std::string_view code, std::string_view message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

bool IsBlank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); });
}

std::int64_t NowMillis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

BackendKind ParseBackend(const std::string& name) {
  if (name == "simulated") return BackendKind::kSimulated;
  if (name == "http") return BackendKind::kHttp;
  throw Error(ErrorCode::kSchema, fmt::format("unknown backend '{}'", name));
}

nlohmann::json RewardJson(const std::optional<RewardOutcome>& r) {
  if (!r) return nullptr;
  return {{"value", r->value},
          {"kind", RewardKindName(r->kind)},
          {"source", RewardSourceName(r->source)}};
}

void Reply(httplib::Response& res, const HttpResult& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

bool ParseInt(const std::string& text, std::int64_t& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

nlohmann::json ServiceConfigToJson(const ServiceConfig& c) {
  return {{"host", c.host},
          {"port", c.port},
          {"corpus", c.corpus_path},
          {"tasks", c.tasks_path},
          {"checkpoint", c.checkpoint_path},
          {"episodes", c.episodes_path},
          {"feedback", c.feedback_path},
          {"metrics", c.metrics_path},
          {"backend", BackendName(c.backend)},
          {"reasoner", HttpReasonerConfigToJson(c.reasoner)},
          {"episode", rl::EpisodeConfigToJson(c.episode)}};
}

ServiceConfig ServiceConfigFromJson(const nlohmann::json& j) {
  RequireOnlyKeys(j,
                  {"host", "port", "corpus", "tasks", "checkpoint", "episodes", "feedback",
                   "metrics", "backend", "reasoner", "episode"},
                  "service config");
  ServiceConfig c;
  try {
    if (j.contains("host")) c.host = j["host"].get<std::string>();
    if (j.contains("port")) c.port = j["port"].get<int>();
    if (j.contains("corpus")) c.corpus_path = j["corpus"].get<std::string>();
    if (j.contains("tasks")) c.tasks_path = j["tasks"].get<std::string>();
    if (j.contains("checkpoint")) c.checkpoint_path = j["checkpoint"].get<std::string>();
    if (j.contains("episodes")) c.episodes_path = j["episodes"].get<std::string>();
    if (j.contains("feedback")) c.feedback_path = j["feedback"].get<std::string>();
    if (j.contains("metrics")) c.metrics_path = j["metrics"].get<std::string>();
    if (j.contains("backend")) c.backend = ParseBackend(j["backend"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("bad service config: {}", e.what()));
  }
  if (j.contains("reasoner")) c.reasoner = HttpReasonerConfigFromJson(j["reasoner"]);
  if (j.contains("episode")) c.episode = rl::EpisodeConfigFromJson(j["episode"]);
  return c;
}

void CheckServicePaths(const ServiceConfig& c) {
  auto need = [](const std::string& path, std::string_view what) {
    if (path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("no {} path configured", what));
    }
    if (!std::filesystem::exists(path)) {
      throw Error(ErrorCode::kNotFound, fmt::format("{} '{}' does not exist", what, path));
    }
  };
  need(c.corpus_path, "corpus");
  need(c.checkpoint_path, "checkpoint");
  if (!c.tasks_path.empty()) need(c.tasks_path, "tasks");
}

Service::Service(InvertedIndex index, std::vector<TaskInstance> tasks,
                 std::vector<PromptTemplate> templates, rl::EpisodeConfig episode_config,
                 std::unique_ptr<Reasoner> reasoner, EpisodeStore& episodes,
                 FeedbackStore& feedback, std::string metrics_path)
    : index_(std::move(index)),
      tasks_(std::move(tasks)),
      templates_(std::move(templates)),
      episode_config_(episode_config),
      reasoner_(std::move(reasoner)),
      episodes_(episodes),
      feedback_(feedback),
      metrics_path_(std::move(metrics_path)) {
  if (!reasoner_) throw Error(ErrorCode::kInvalidArgument, "service needs a reasoner");
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    task_by_id_.emplace(tasks_[i].instance_id, i);
    task_by_query_.emplace(tasks_[i].query, i);
  }
}

Service::~Service() { Stop(); }

void Service::LoadSnapshot(nn::Mlp net) {
  if (net.input_size() != rl::kFeatureCount || net.output_size() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("snapshot must map {} features to 1 value", rl::kFeatureCount));
  }
  auto next = std::make_shared<const nn::Mlp>(std::move(net));
  std::lock_guard lock(snapshot_mu_);
  snapshot_ = std::move(next);
}

std::shared_ptr<const nn::Mlp> Service::Snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

bool Service::has_snapshot() const { return Snapshot() != nullptr; }

HttpResult Service::Query(const nlohmann::json& body) {
  if (!body.is_object()) return ErrorResult(400, "invalid_argument", "body must be a JSON object");
  if (!body.contains("query") || !body["query"].is_string() ||
      IsBlank(body["query"].get_ref<const std::string&>())) {
    return ErrorResult(400, "invalid_argument", "query must be a non-empty string");
  }
  std::string task(kDefaultTask);
  if (body.contains("task_description")) {
    if (!body["task_description"].is_string()) {
      return ErrorResult(400, "invalid_argument", "task_description must be a string");
    }
    if (!IsBlank(body["task_description"].get_ref<const std::string&>())) {
      task = body["task_description"].get<std::string>();
    }
  }
  const auto snapshot = Snapshot();
  if (!snapshot) return ErrorResult(503, "no_snapshot", "no policy snapshot is loaded");

  const std::string query = body["query"].get<std::string>();
  TaskInstance inst;
  if (body.contains("instance_id")) {
    if (!body["instance_id"].is_string()) {
      return ErrorResult(400, "invalid_argument", "instance_id must be a string");
    }
    auto it = task_by_id_.find(body["instance_id"].get<std::string>());
    if (it == task_by_id_.end()) {
      return ErrorResult(404, "not_found", "unknown instance_id");
    }
    inst = tasks_[it->second];
  } else if (auto it = task_by_query_.find(query); it != task_by_query_.end()) {
    inst = tasks_[it->second];
  } else {
    inst.instance_id = "adhoc";
    inst.query = query;
  }
  inst.task_description = task;

  const rl::EpisodeEnv env(index_, inst, episode_config_);
  if (env.candidates().empty()) {
    return ErrorResult(422, "empty_pool", "no document matches the query");
  }
  rl::EpisodeResult result;
  try {
    std::lock_guard lock(reasoner_mu_);
    result = rl::RunEpisode(*snapshot, env, templates_, *reasoner_,
                            rl::RunOptions{rl::Mode::kEval, 0.0, nullptr, ""});
  } catch (const ReasonerError& e) {
    HttpResult r = ErrorResult(502, "reasoner_failure", e.what());
    r.body["error"]["upstream_status"] = e.status();
    return r;
  }
  const auto stored = episodes_.AppendNew(std::move(result.trace));

  nlohmann::json support = nlohmann::json::array();
  for (const auto& id : stored->support) {
    support.push_back({{"id", id}, {"text", index_.document(id).text}});
  }
  const int tid = *stored->template_id;
  return {200,
          {{"episode_id", stored->episode_id},
           {"answer", stored->response->text},
           {"support", std::move(support)},
           {"dropped", stored->dropped},
           {"template_id", tid},
           {"template_style", templates_[static_cast<std::size_t>(tid)].style},
           {"reward", RewardJson(stored->reward)}}};
}

HttpResult Service::Feedback(const nlohmann::json& body) {
  if (!body.is_object()) return ErrorResult(400, "invalid_argument", "body must be a JSON object");
  if (!body.contains("episode_id") || !body["episode_id"].is_string()) {
    return ErrorResult(400, "invalid_argument", "episode_id must be a string");
  }
  std::string rater = "anonymous";
  if (body.contains("rater")) {
    if (!body["rater"].is_string() || IsBlank(body["rater"].get_ref<const std::string&>())) {
      return ErrorResult(400, "invalid_argument", "rater must be a non-empty string");
    }
    rater = body["rater"].get<std::string>();
  }
  const std::string episode_id = body["episode_id"].get<std::string>();
  if (!episodes_.contains(episode_id)) {
    return ErrorResult(404, "not_found", fmt::format("unknown episode '{}'", episode_id));
  }
  std::optional<Rating> rating;
  if (body.contains("rating") && body["rating"].is_number()) {
    const double v = body["rating"].get<double>();
    if (v == std::floor(v)) rating = RatingFromInt(static_cast<std::int64_t>(v));
  }
  if (!rating) return ErrorResult(422, "invalid_rating", "rating must be -1, 0 or 1");

  FeedbackRecord record{episode_id, *rating, rater, NowMillis()};
  feedback_.Submit(record);
  return {200,
          {{"feedback", FeedbackToJson(record)},
           {"human_reward", *feedback_.HumanReward(episode_id)}}};
}

nlohmann::json Service::EpisodeSummary(const EpisodeTrace& t) const {
  const auto human = feedback_.HumanReward(t.episode_id);
  return {{"episode_id", t.episode_id},
          {"instance_id", t.instance_id},
          {"query", t.query},
          {"answer", t.response ? nlohmann::json(t.response->text) : nlohmann::json(nullptr)},
          {"template_id", t.template_id ? nlohmann::json(*t.template_id) : nlohmann::json(nullptr)},
          {"support", t.support},
          {"reward", RewardJson(t.reward)},
          {"human_reward", human ? nlohmann::json(*human) : nlohmann::json(nullptr)}};
}

nlohmann::json Service::EpisodeDetail(const EpisodeTrace& t) const {
  nlohmann::json j = TraceToJson(t);
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& id : t.support) {
    docs.push_back({{"id", id},
                    {"text", index_.contains(id) ? nlohmann::json(index_.document(id).text)
                                                 : nlohmann::json(nullptr)}});
  }
  j["support_docs"] = std::move(docs);
  j["answer"] = t.response ? nlohmann::json(t.response->text) : nlohmann::json(nullptr);
  if (t.template_id && static_cast<std::size_t>(*t.template_id) < templates_.size()) {
    j["template_style"] = templates_[static_cast<std::size_t>(*t.template_id)].style;
  }
  nlohmann::json fb = nlohmann::json::array();
  for (const auto& r : feedback_.ForEpisode(t.episode_id)) fb.push_back(FeedbackToJson(r));
  j["feedback"] = std::move(fb);
  const auto human = feedback_.HumanReward(t.episode_id);
  j["human_reward"] = human ? nlohmann::json(*human) : nlohmann::json(nullptr);
  return j;
}

HttpResult Service::ListEpisodes(std::int64_t limit, std::int64_t offset) const {
  limit = std::clamp<std::int64_t>(limit, 0, kMaxPageSize);
  offset = std::max<std::int64_t>(offset, 0);
  const auto page =
      episodes_.List(static_cast<std::size_t>(limit), static_cast<std::size_t>(offset));
  nlohmann::json items = nlohmann::json::array();
  for (const auto& t : page.items) items.push_back(EpisodeSummary(*t));
  return {200,
          {{"total", page.total}, {"limit", limit}, {"offset", offset}, {"items", std::move(items)}}};
}

HttpResult Service::GetEpisode(const std::string& episode_id) const {
  const auto trace = episodes_.Get(episode_id);
  if (!trace) return ErrorResult(404, "not_found", fmt::format("unknown episode '{}'", episode_id));
  return {200, EpisodeDetail(*trace)};
}

HttpResult Service::Metrics() const {
  std::vector<rl::EpisodeMetrics> metrics;
  if (!metrics_path_.empty() && std::filesystem::exists(metrics_path_)) {
    metrics = rl::ParseMetricsCsv(ReadFile(metrics_path_));
  }
  return {200, {{"episodes", rl::MetricsToJson(metrics)}}};
}

HttpResult Service::Health() const {
  return {200,
          {{"status", "ok"},
           {"snapshot_loaded", has_snapshot()},
           {"episodes", episodes_.size()},
           {"backend", BackendName(reasoner_->kind())}}};
}

bool Service::Bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  auto& srv = *server_;

  auto guarded = [](httplib::Response& res, const auto& fn) {
    try {
      Reply(res, fn());
    } catch (const Error& e) {
      Reply(res, ErrorResult(500, ErrorCodeName(e.code()), e.what()));
    } catch (const std::exception& e) {
      Reply(res, ErrorResult(500, "internal", e.what()));
    }
  };
  auto with_json = [guarded](const httplib::Request& req, httplib::Response& res,
                             const auto& fn) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      Reply(res, ErrorResult(400, "invalid_json", "request body is not valid JSON"));
      return;
    }
    guarded(res, [&] { return fn(body); });
  };

  srv.Post("/v1/query", [this, with_json](const httplib::Request& req, httplib::Response& res) {
    with_json(req, res, [this](const nlohmann::json& b) { return Query(b); });
  });
  srv.Post("/v1/feedback", [this, with_json](const httplib::Request& req, httplib::Response& res) {
    with_json(req, res, [this](const nlohmann::json& b) { return Feedback(b); });
  });
  srv.Get("/v1/episodes", [this, guarded](const httplib::Request& req, httplib::Response& res) {
    std::int64_t limit = kDefaultPageSize;
    std::int64_t offset = 0;
    if (req.has_param("limit") && !ParseInt(req.get_param_value("limit"), limit)) {
      Reply(res, ErrorResult(400, "invalid_argument", "limit must be an integer"));
      return;
    }
    if (req.has_param("offset") && !ParseInt(req.get_param_value("offset"), offset)) {
      Reply(res, ErrorResult(400, "invalid_argument", "offset must be an integer"));
      return;
    }
    guarded(res, [&] { return ListEpisodes(limit, offset); });
  });
  srv.Get(R"(/v1/episodes/([^/]+))",
          [this, guarded](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            guarded(res, [&] { return GetEpisode(id); });
          });
  srv.Get("/v1/metrics", [this, guarded](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return Metrics(); });
  });
  srv.Get("/v1/health", [this, guarded](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return Health(); });
  });

  if (port == 0) {
    port_ = srv.bind_to_any_port(host);
    return port_ > 0;
  }
  if (!srv.bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void Service::ServeForever() {
  if (!server_) throw Error(ErrorCode::kInvalidArgument, "Bind() before ServeForever()");
  server_->listen_after_bind();
}

void Service::Stop() {
  if (server_) server_->stop();
}

}  // namespace rlrag
