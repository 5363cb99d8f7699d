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

#include "rlrag/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <optional>

#include "rlrag/error.hpp"

namespace rlrag::rl {
namespace {

// All ascending position lists of length 1..k over [0, n).
void EnumerateSubsets(std::size_t n, std::size_t k, std::vector<std::size_t>& cur,
                      std::size_t start, std::vector<std::vector<std::size_t>>& out) {
  if (!cur.empty()) out.push_back(cur);
  if (cur.size() == k) return;
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    EnumerateSubsets(n, k, cur, i + 1, out);
    cur.pop_back();
  }
}

std::vector<std::string> SortedIds(const EpisodeEnv& env, const std::vector<std::size_t>& pos) {
  std::vector<std::string> ids;
  for (std::size_t p : pos) ids.push_back(env.candidates()[p].doc->id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

OracleResult BruteForceOptimum(const EpisodeEnv& env, std::span<const PromptTemplate> templates,
                               Reasoner& reasoner) {
  if (reasoner.kind() != BackendKind::kSimulated) {
    throw Error(ErrorCode::kInvalidArgument, "the oracle only runs against the simulated backend");
  }
  if (!env.instance().has_ground_truth()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("instance '{}' has no ground truth", env.instance().instance_id));
  }
  if (env.candidates().empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("no candidate documents for '{}'", env.instance().instance_id));
  }
  const std::size_t n_templates = std::min(env.config().n_templates, templates.size());
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::size_t> cur;
  EnumerateSubsets(env.candidates().size(), env.config().k_max, cur, 0, subsets);

  std::optional<OracleResult> best;
  std::vector<std::string> best_ids;
  std::size_t evaluated = 0;
  for (std::size_t t = 0; t < n_templates; ++t) {
    for (const auto& subset : subsets) {
      const EpisodeTrace trace =
          ExecuteChoice(env, templates, reasoner, static_cast<int>(t), subset);
      ++evaluated;
      const RewardOutcome& r = *trace.reward;
      auto ids = SortedIds(env, subset);
      bool better = !best;
      if (best) {
        if (r.value != best->reward.value) {
          better = r.value > best->reward.value;
        } else if (subset.size() != best->positions.size()) {
          better = subset.size() < best->positions.size();
        } else if (ids != best_ids) {
          better = ids < best_ids;
        }
        // Equal on everything else: the earlier (lower) template stays.
      }
      if (better) {
        best = OracleResult{static_cast<int>(t), subset, trace.support, r, 0};
        best_ids = std::move(ids);
      }
    }
  }
  best->evaluated = evaluated;
  return *best;
}

}  // namespace rlrag::rl
