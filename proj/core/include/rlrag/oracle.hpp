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

#ifndef RLRAG_ORACLE_HPP_
#define RLRAG_ORACLE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rlrag/episode.hpp"
#include "rlrag/prompting.hpp"
#include "rlrag/reasoner.hpp"
#include "rlrag/trace.hpp"

namespace rlrag::rl {

struct OracleResult {
  int template_id = 0;
  std::vector<std::size_t> positions;  // ascending pool positions
  std::vector<std::string> support;    // parallel to positions
  RewardOutcome reward;
  std::size_t evaluated = 0;           // (template, subset) pairs tried
};

// Exhaustive search over templates x non-empty pool subsets of size
// <= k_max. Ties prefer the smaller support, then the lexicographically
// smaller sorted id list, then the lower template id.
// Refuses the HTTP backend and instances without ground truth.
OracleResult BruteForceOptimum(const EpisodeEnv& env,
                               std::span<const PromptTemplate> templates,
                               Reasoner& reasoner);

}  // namespace rlrag::rl

#endif  // RLRAG_ORACLE_HPP_
