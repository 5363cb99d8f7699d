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

#include "rlrag/benchmark.hpp"

#include <gtest/gtest.h>

#include <set>

#include "rlrag/error.hpp"

namespace rlrag {
namespace {

TEST(BenchmarkTest, DefaultSeedShape) {
  const Benchmark b = GenerateBenchmark({});
  EXPECT_EQ(b.instances.size(), 70u);
  std::size_t damaged = 0, multi = 0;
  for (const auto& inst : b.instances) {
    damaged += inst.damaging.empty() ? 0 : 1;
    multi += inst.gold_doc_ids.size() > 1 ? 1 : 0;
    EXPECT_EQ(inst.task_description, "Question Answering");
    EXPECT_TRUE(inst.has_ground_truth());
  }
  EXPECT_EQ(damaged, 31u);
  EXPECT_EQ(b.docs.size(), 500u + damaged);
  EXPECT_GT(multi, 0u);
  EXPECT_LT(multi, 70u);
}

TEST(BenchmarkTest, SameSeedSameBenchmark) {
  const Benchmark a = GenerateBenchmark({});
  const Benchmark b = GenerateBenchmark({});
  ASSERT_EQ(a.docs.size(), b.docs.size());
  for (std::size_t i = 0; i < a.docs.size(); ++i) {
    EXPECT_EQ(a.docs[i].id, b.docs[i].id);
    EXPECT_EQ(a.docs[i].text, b.docs[i].text);
  }
  for (std::size_t i = 0; i < a.instances.size(); ++i) {
    EXPECT_EQ(InstanceToJson(a.instances[i]), InstanceToJson(b.instances[i]));
  }
  BenchmarkParams other;
  other.seed = 8;
  EXPECT_NE(GenerateBenchmark(other).docs[0].text, a.docs[0].text);
}

TEST(BenchmarkTest, DamagingDocsRankRightBehindGold) {
  const Benchmark b = GenerateBenchmark({});
  const auto index = InvertedIndex::Build(b.docs);
  for (const auto& inst : b.instances) {
    const auto pool = index.TopN(Tokenize(inst.query), 10);
    std::set<std::string> top;
    for (std::size_t i = 0; i < pool.size() && i < 2 * inst.gold_doc_ids.size(); ++i) {
      top.insert(pool.entries[i].doc_id);
    }
    for (const auto& [id, wrong] : inst.damaging) {
      EXPECT_TRUE(top.count(id)) << inst.instance_id;
      EXPECT_NE(wrong, inst.gold_answer);
    }
    for (const auto& g : inst.gold_doc_ids) {
      bool in_pool = false;
      for (const auto& e : pool.entries) in_pool |= e.doc_id == g;
      EXPECT_TRUE(in_pool) << inst.instance_id << " lost " << g;
    }
  }
}

TEST(BenchmarkTest, ParameterErrors) {
  BenchmarkParams p;
  p.n_entities = 2;
  p.n_attributes = 2;
  p.n_queries = 5;
  EXPECT_THROW(GenerateBenchmark(p), Error);
  p = {};
  p.damaging_rate = 1.5;
  EXPECT_THROW(GenerateBenchmark(p), Error);
  p = {};
  p.n_entities = 0;
  EXPECT_THROW(GenerateBenchmark(p), Error);
}

}  // namespace
}  // namespace rlrag
