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

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include "rlrag/error.hpp"
#include "rlrag/rng.hpp"

namespace rlrag {
namespace {

constexpr std::array<const char*, 16> kAttributeNames = {
    "color",  "size",   "origin",  "material", "owner",   "era",
    "shape",  "flavor", "habitat", "weight",   "rank",    "sound",
    "texture", "climate", "dialect", "currency"};

constexpr std::size_t kMaxValuesPerAttribute = 8;

class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) {
    for (const char* w : {"what", "is", "the", "of", "and", "unknown", "rumor", "has", "it"}) {
      used_.insert(w);
    }
    for (const char* a : kAttributeNames) used_.insert(a);
  }

  // `syllables` consonant-vowel pairs plus a closing consonant.
  std::string Make(int syllables) {
    static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
    static constexpr std::string_view kVowels = "aeiou";
    for (;;) {
      std::string word;
      for (int i = 0; i < syllables; ++i) {
        word.push_back(kConsonants[rng_.uniform_index(kConsonants.size())]);
        word.push_back(kVowels[rng_.uniform_index(kVowels.size())]);
      }
      word.push_back(kConsonants[rng_.uniform_index(kConsonants.size())]);
      if (used_.insert(word).second) return word;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

}  // namespace

Benchmark GenerateBenchmark(const BenchmarkParams& p) {
  if (p.n_entities == 0 || p.n_attributes == 0 || p.n_queries == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "n_entities, n_attributes and n_queries must be positive");
  }
  if (!(p.damaging_rate >= 0.0 && p.damaging_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "damaging_rate must be in [0, 1]");
  }
  if (!(p.multi_hop_fraction >= 0.0 && p.multi_hop_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "multi_hop_fraction must be in [0, 1]");
  }
  if (p.n_queries > p.n_entities * p.n_attributes) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} queries requested but only {} distinct "
                            "(entity, attribute) pairs exist",
                            p.n_queries, p.n_entities * p.n_attributes));
  }
  const std::size_t n_values =
      std::min<std::size_t>(kMaxValuesPerAttribute, p.n_entities);
  if (n_values < 2 && p.damaging_rate > 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "a single value per attribute leaves no distractor value; "
                "use more entities or damaging_rate 0");
  }

  Rng rng(p.seed);
  WordMaker words(rng);

  std::vector<std::string> attributes;
  for (std::size_t a = 0; a < p.n_attributes; ++a) {
    attributes.push_back(a < kAttributeNames.size() ? kAttributeNames[a]
                                                    : words.Make(2));
  }
  std::vector<std::string> entities;
  for (std::size_t e = 0; e < p.n_entities; ++e) entities.push_back(words.Make(3));
  std::vector<std::vector<std::string>> values(p.n_attributes);
  for (auto& vs : values) {
    for (std::size_t v = 0; v < n_values; ++v) vs.push_back(words.Make(2));
  }

  Benchmark bench;
  std::vector<std::vector<std::size_t>> fact_value(
      p.n_entities, std::vector<std::size_t>(p.n_attributes));
  for (std::size_t e = 0; e < p.n_entities; ++e) {
    for (std::size_t a = 0; a < p.n_attributes; ++a) {
      fact_value[e][a] = rng.uniform_index(n_values);
      bench.docs.push_back(Document::Make(
          fmt::format("f-{:04d}-{:02d}", e, a),
          fmt::format("the {} of {} is {}", attributes[a], entities[e],
                      values[a][fact_value[e][a]]),
          {{"entity", entities[e]}, {"attribute", attributes[a]}}));
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t e = 0; e < p.n_entities; ++e) {
    for (std::size_t a = 0; a < p.n_attributes; ++a) pairs.emplace_back(e, a);
  }
  rng.shuffle(std::span(pairs));
  pairs.resize(p.n_queries);

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [e, a] = pairs[i];
    const std::string& value = values[a][fact_value[e][a]];
    TaskInstance inst;
    inst.instance_id = fmt::format("q-{:04d}", i);
    inst.task_description = p.task_description;

    const bool multi_hop =
        p.n_attributes >= 2 && rng.bernoulli(p.multi_hop_fraction);
    std::string second_value;
    if (multi_hop) {
      std::size_t a2 = rng.uniform_index(p.n_attributes - 1);
      if (a2 >= a) ++a2;
      second_value = values[a2][fact_value[e][a2]];
      inst.query = fmt::format("what is the {} and {} of {}", attributes[a],
                               attributes[a2], entities[e]);
      inst.gold_answer = fmt::format("{} and {}", value, second_value);
      inst.gold_doc_ids = {fmt::format("f-{:04d}-{:02d}", e, a),
                           fmt::format("f-{:04d}-{:02d}", e, a2)};
      std::sort(inst.gold_doc_ids.begin(), inst.gold_doc_ids.end());
    } else {
      inst.query = fmt::format("what is the {} of {}", attributes[a], entities[e]);
      inst.gold_answer = value;
      inst.gold_doc_ids = {fmt::format("f-{:04d}-{:02d}", e, a)};
    }

    if (rng.bernoulli(p.damaging_rate)) {
      std::size_t w = rng.uniform_index(n_values - 1);
      if (w >= fact_value[e][a]) ++w;
      const std::string& wrong = values[a][w];
      const std::string id = fmt::format("d-{:04d}-{:02d}", e, a);
      bench.docs.push_back(Document::Make(
          id,
          fmt::format("rumor has it the {} of {} is {}", attributes[a],
                      entities[e], wrong),
          {{"entity", entities[e]}, {"attribute", attributes[a]}}));
      inst.damaging.emplace(
          id, multi_hop ? fmt::format("{} and {}", wrong, second_value) : wrong);
    }
    ValidateInstance(inst);
    bench.instances.push_back(std::move(inst));
  }

  const InvertedIndex index = InvertedIndex::Build(bench.docs);
  for (const auto& inst : bench.instances) {
    if (inst.damaging.empty()) continue;
    const auto tokens = Tokenize(inst.query);
    const CandidatePool top =
        index.TopN(tokens, 2 * inst.gold_doc_ids.size(), inst.instance_id);
    for (const auto& [id, answer] : inst.damaging) {
      const bool found =
          std::any_of(top.entries.begin(), top.entries.end(),
                      [&](const ScoredDoc& d) { return d.doc_id == id; });
      if (!found) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("generator self-check failed: damaging doc "
                                "'{}' is outside the BM25 top {} for '{}'",
                                id, top.entries.size(), inst.instance_id));
      }
    }
  }
  return bench;
}

}  // namespace rlrag
