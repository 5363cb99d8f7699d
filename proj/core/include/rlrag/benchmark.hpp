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

#ifndef RLRAG_BENCHMARK_HPP_
#define RLRAG_BENCHMARK_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rlrag/corpus.hpp"
#include "rlrag/reasoner.hpp"

namespace rlrag {

struct BenchmarkParams {
  std::uint64_t seed = 7;
  std::size_t n_entities = 100;
  std::size_t n_attributes = 5;
  std::size_t n_queries = 70;
  double damaging_rate = 0.5;
  double multi_hop_fraction = 0.2;
  std::string task_description = "Question Answering";
};

struct Benchmark {
  std::vector<Document> docs;
  std::vector<TaskInstance> instances;
};

// Synthetic fact database and questions over it.
//
// Every (entity, attribute) pair gets one fact doc "the <attribute> of
// <entity> is <value>" (id f-EEEE-AA). Queries ask "what is the <attribute>
// of <entity>" about distinct pairs; a multi-hop share asks for two
// attributes of the same entity and needs both facts. With probability
// damaging_rate a query also gets a damaging doc (id d-EEEE-AA), "rumor has
// it the <attribute> of <entity> is <other value>". It matches the query as
// well as the gold fact does and is three tokens longer, so BM25 ranks it
// right behind the gold fact and ahead of the entity's other facts.
//
// The generator verifies that every damaging doc lands in the BM25 top
// 2*|gold| for its query and throws if not.
Benchmark GenerateBenchmark(const BenchmarkParams& params);

}  // namespace rlrag

#endif  // RLRAG_BENCHMARK_HPP_
