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

#include <httplib.h>
#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "rlrag/benchmark.hpp"
#include "rlrag/error.hpp"
#include "rlrag/io.hpp"
#include "rlrag/trainer.hpp"

namespace rlrag {
namespace {

namespace fs = std::filesystem;

class FailingReasoner final : public Reasoner {
 public:
  ReasonerResponse Answer(const AggregatedPrompt&, const TaskInstance&,
                          std::span<const std::string>) override {
    throw ReasonerError(503, "overloaded", "upstream unavailable");
  }
  BackendKind kind() const override { return BackendKind::kHttp; }
};

// 4 entities x 5 attributes, no damaging docs: exactly 20 docs.
Benchmark SmallBench() {
  BenchmarkParams p;
  p.n_entities = 4;
  p.n_attributes = 5;
  p.n_queries = 6;
  p.damaging_rate = 0.0;
  return GenerateBenchmark(p);
}

class ServiceTest : public ::testing::Test {
 protected:
  void Make(std::unique_ptr<Reasoner> reasoner, bool snapshot = true) {
    bench_ = SmallBench();
    service_ = std::make_unique<Service>(InvertedIndex::Build(bench_.docs), bench_.instances,
                                         DefaultTemplates(), rl::EpisodeConfig{},
                                         std::move(reasoner), episodes_, feedback_);
    if (snapshot) service_->LoadSnapshot(rl::MakeQNetwork(rl::TrainConfig{}));
  }
  void SetUp() override { Make(std::make_unique<SimulatedReasoner>()); }

  HttpResult Ask(const std::string& q) { return service_->Query({{"query", q}}); }

  Benchmark bench_;
  EpisodeStore episodes_;
  FeedbackStore feedback_;
  std::unique_ptr<Service> service_;
};

TEST_F(ServiceTest, FixtureHasTwentyDocs) { EXPECT_EQ(bench_.docs.size(), 20u); }

TEST_F(ServiceTest, QueryRecordsAnEpisode) {
  const auto r = service_->Query({{"query", bench_.instances[0].query}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["episode_id"], "ep-000001");
  EXPECT_TRUE(r.body["answer"].is_string());
  EXPECT_GE(r.body["support"].size(), 1u);
  EXPECT_TRUE(r.body["support"][0].contains("text"));
  EXPECT_TRUE(r.body["reward"].is_object()) << "a known task query gets a reward";
  EXPECT_EQ(episodes_.size(), 1u);
  EXPECT_EQ(episodes_.Get("ep-000001")->instance_id, bench_.instances[0].instance_id);
}

TEST_F(ServiceTest, AdhocQueryHasNoReward) {
  const auto r = Ask("what is the color of " + bench_.docs[0].meta.at("entity"));
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_TRUE(r.body["reward"].is_null());
  EXPECT_EQ(episodes_.Get(r.body["episode_id"])->instance_id, "adhoc");
}

TEST_F(ServiceTest, QueryValidation) {
  EXPECT_EQ(service_->Query(nlohmann::json::array()).status, 400);
  EXPECT_EQ(service_->Query({{"query", "   "}}).status, 400);
  EXPECT_EQ(service_->Query({{"query", 3}}).status, 400);
  EXPECT_EQ(service_->Query({{"query", "x"}, {"instance_id", "nope"}}).status, 404);
  const auto empty = Ask("zzzz qqqq");
  EXPECT_EQ(empty.status, 422);
  EXPECT_EQ(empty.body["error"]["code"], "empty_pool");
  EXPECT_EQ(episodes_.size(), 0u);
}

TEST_F(ServiceTest, NoSnapshotIs503) {
  Make(std::make_unique<SimulatedReasoner>(), false);
  const auto r = Ask(bench_.instances[0].query);
  EXPECT_EQ(r.status, 503);
  EXPECT_EQ(r.body["error"]["code"], "no_snapshot");
  EXPECT_FALSE(service_->Health().body["snapshot_loaded"].get<bool>());
}

TEST_F(ServiceTest, ReasonerFailureIs502AndStoresNothing) {
  Make(std::make_unique<FailingReasoner>());
  const auto r = Ask(bench_.instances[0].query);
  EXPECT_EQ(r.status, 502);
  EXPECT_EQ(r.body["error"]["code"], "reasoner_failure");
  EXPECT_EQ(r.body["error"]["upstream_status"], 503);
  EXPECT_EQ(episodes_.size(), 0u);
}

TEST_F(ServiceTest, SnapshotShapeIsChecked) {
  EXPECT_THROW(service_->LoadSnapshot(nn::Mlp::Init({10, 1}, 1)), Error);
  EXPECT_TRUE(service_->has_snapshot());
}

TEST_F(ServiceTest, FeedbackFlow) {
  const std::string id = Ask(bench_.instances[0].query).body["episode_id"];
  EXPECT_EQ(service_->Feedback({{"rating", 1}}).status, 400);
  EXPECT_EQ(service_->Feedback({{"episode_id", "ep-404"}, {"rating", 1}}).status, 404);
  EXPECT_EQ(service_->Feedback({{"episode_id", id}, {"rating", 2}}).status, 422);
  EXPECT_EQ(service_->Feedback({{"episode_id", id}, {"rating", 0.5}}).status, 422);
  EXPECT_EQ(service_->Feedback({{"episode_id", id}, {"rating", "1"}}).status, 422);
  EXPECT_EQ(service_->Feedback({{"episode_id", id}, {"rating", 1}, {"rater", " "}}).status, 400);
  EXPECT_EQ(feedback_.size(), 0u);

  auto ok = service_->Feedback({{"episode_id", id}, {"rating", -1}, {"rater", "ann"}});
  ASSERT_EQ(ok.status, 200);
  EXPECT_EQ(ok.body["human_reward"], -1.0);
  ok = service_->Feedback({{"episode_id", id}, {"rating", 1}});
  EXPECT_EQ(ok.body["feedback"]["rater"], "anonymous");
  EXPECT_EQ(ok.body["human_reward"], 0.0);

  const auto detail = service_->GetEpisode(id);
  ASSERT_EQ(detail.status, 200);
  EXPECT_EQ(detail.body["feedback"].size(), 2u);
  EXPECT_EQ(detail.body["human_reward"], 0.0);
  EXPECT_TRUE(detail.body.contains("support_docs"));
  EXPECT_TRUE(detail.body.contains("q_values"));
  EXPECT_EQ(service_->GetEpisode("ep-404").status, 404);
}

TEST_F(ServiceTest, ListingPages) {
  for (int i = 0; i < 3; ++i) ASSERT_EQ(Ask(bench_.instances[static_cast<std::size_t>(i)].query).status, 200);
  auto all = service_->ListEpisodes(50, 0);
  ASSERT_EQ(all.body["items"].size(), 3u);
  EXPECT_EQ(all.body["items"][0]["episode_id"], "ep-000001");
  EXPECT_EQ(all.body["items"][2]["episode_id"], "ep-000003");
  EXPECT_EQ(all.body["items"][1]["query"], bench_.instances[1].query);
  const auto none = service_->ListEpisodes(0, 0);
  EXPECT_TRUE(none.body["items"].empty());
  EXPECT_EQ(none.body["total"], 3);
  EXPECT_TRUE(service_->ListEpisodes(10, 7).body["items"].empty());
  EXPECT_EQ(service_->ListEpisodes(100000, -3).body["limit"], 500);
  EXPECT_EQ(service_->ListEpisodes(100000, -3).body["offset"], 0);
}

TEST_F(ServiceTest, MetricsReadsTheCsv) {
  const std::string path = (fs::temp_directory_path() / "rlrag_service_metrics.csv").string();
  std::vector<rl::EpisodeMetrics> ms{{0, 1.0, std::nullopt, 1.0, 1, false, 0}};
  WriteFile(path, rl::MetricsCsv(ms));
  Service s(InvertedIndex::Build(bench_.docs), {}, DefaultTemplates(), {},
            std::make_unique<SimulatedReasoner>(), episodes_, feedback_, path);
  const auto r = s.Metrics();
  ASSERT_EQ(r.body["episodes"].size(), 1u);
  EXPECT_TRUE(service_->Metrics().body["episodes"].empty());
  fs::remove(path);
}

TEST_F(ServiceTest, HttpRoundTrip) {
  ASSERT_TRUE(service_->Bind("127.0.0.1", 0));
  std::thread server([&] { service_->ServeForever(); });
  httplib::Client cli("127.0.0.1", service_->bound_port());
  cli.set_read_timeout(10, 0);
  for (int i = 0; i < 50 && !cli.Get("/v1/health"); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }

  auto q = cli.Post("/v1/query", nlohmann::json{{"query", bench_.instances[0].query}}.dump(),
                    "application/json");
  ASSERT_TRUE(q);
  ASSERT_EQ(q->status, 200) << q->body;
  const std::string id = nlohmann::json::parse(q->body)["episode_id"];

  auto list = cli.Get("/v1/episodes?limit=10&offset=0");
  ASSERT_TRUE(list);
  EXPECT_EQ(nlohmann::json::parse(list->body)["items"][0]["episode_id"], id);

  auto fb = cli.Post("/v1/feedback", nlohmann::json{{"episode_id", id}, {"rating", -1}}.dump(),
                     "application/json");
  ASSERT_TRUE(fb);
  EXPECT_EQ(fb->status, 200);

  auto detail = cli.Get("/v1/episodes/" + id);
  ASSERT_TRUE(detail);
  EXPECT_EQ(nlohmann::json::parse(detail->body)["human_reward"], -1.0);

  auto bad = cli.Post("/v1/query", "{nope", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(nlohmann::json::parse(bad->body)["error"]["code"], "invalid_json");
  auto bad_limit = cli.Get("/v1/episodes?limit=ten");
  ASSERT_TRUE(bad_limit);
  EXPECT_EQ(bad_limit->status, 400);
  auto missing = cli.Get("/v1/episodes/ep-999999");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto metrics = cli.Get("/v1/metrics");
  ASSERT_TRUE(metrics);
  EXPECT_EQ(metrics->status, 200);

  service_->Stop();
  server.join();
}

TEST(ServiceConfigTest, JsonRoundTrip) {
  ServiceConfig c;
  c.port = 9001;
  c.corpus_path = "c.jsonl";
  c.backend = BackendKind::kHttp;
  const auto back = ServiceConfigFromJson(ServiceConfigToJson(c));
  EXPECT_EQ(ServiceConfigToJson(back), ServiceConfigToJson(c));
  EXPECT_THROW(ServiceConfigFromJson({{"prot", 1}}), Error);
  EXPECT_THROW(ServiceConfigFromJson({{"backend", "gpt"}}), Error);
  EXPECT_THROW(CheckServicePaths(c), Error);
}

}  // namespace
}  // namespace rlrag
