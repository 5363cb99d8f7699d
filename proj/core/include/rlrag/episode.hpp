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

#ifndef RLRAG_EPISODE_HPP_
#define RLRAG_EPISODE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlrag/corpus.hpp"
#include "rlrag/prompting.hpp"
#include "rlrag/reasoner.hpp"
#include "rlrag/rng.hpp"
#include "rlrag/tinynn.hpp"
#include "rlrag/trace.hpp"

namespace rlrag::rl {

inline constexpr std::size_t kFeatureCount = 12;

struct EpisodeConfig {
  std::size_t pool_size = 10;     // N_pool
  std::size_t k_max = 3;          // largest support set
  std::size_t n_templates = 4;    // T
  std::size_t context_budget = 64;
};

nlohmann::json EpisodeConfigToJson(const EpisodeConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
EpisodeConfig EpisodeConfigFromJson(const nlohmann::json& j);

// A pool entry with everything featurize() needs, computed once.
struct Candidate {
  const Document* doc = nullptr;
  double score = 0.0;
  double score_norm = 0.0;      // score / pool max
  double rank_norm = 0.0;       // position / N_pool
  double query_overlap = 0.0;   // Jaccard(query tokens, doc tokens)
  double length_feature = 0.0;  // min(len / avg_len, 2) / 2
  std::vector<std::string> token_set;  // sorted, unique
};

// Immutable per-instance environment: the instance, its BM25 pool and the
// precomputed candidate features. Holds references into the index, which
// must outlive it.
class EpisodeEnv {
 public:
  EpisodeEnv(const InvertedIndex& index, const TaskInstance& instance,
             const EpisodeConfig& config);

  const TaskInstance& instance() const { return instance_; }
  const EpisodeConfig& config() const { return config_; }
  const CandidatePool& pool() const { return pool_; }
  const std::vector<Candidate>& candidates() const { return candidates_; }
  const std::vector<std::string>& query_tokens() const { return query_tokens_; }

 private:
  TaskInstance instance_;
  EpisodeConfig config_;
  CandidatePool pool_;
  std::vector<Candidate> candidates_;
  std::vector<std::string> query_tokens_;
};

enum class Phase { kChooseTemplate, kChooseDocs, kDone };

struct EpisodeState {
  Phase phase = Phase::kChooseTemplate;
  std::optional<int> template_id;
  std::vector<std::size_t> selected;  // pool positions, selection order
  std::size_t step = 0;
};

struct Action {
  enum class Kind { kChooseTemplate, kSelectDoc, kStop };
  Kind kind = Kind::kStop;
  std::size_t index = 0;  // template id or pool position

  static Action ChooseTemplate(std::size_t t) { return {Kind::kChooseTemplate, t}; }
  static Action SelectDoc(std::size_t p) { return {Kind::kSelectDoc, p}; }
  static Action Stop() { return {Kind::kStop, 0}; }

  std::string Label() const;
  friend bool operator==(const Action&, const Action&) = default;
};

// Enumeration order is the tie-break order: templates ascending, docs by
// pool position, Stop last.
std::vector<Action> LegalActions(const EpisodeEnv& env, const EpisodeState& state);

// Throws Error(kIllegalAction) naming the violated rule.
void CheckLegal(const EpisodeEnv& env, const EpisodeState& state, const Action& action);

// [phase, |selected|/k_max, is-stop, template one-hot (4), candidate
//  score/pool max, candidate rank/N_pool, Jaccard(query, candidate),
//  max Jaccard(candidate, selected docs), candidate length feature].
// Slots that do not apply to the action are 0.
std::vector<double> Featurize(const EpisodeEnv& env, const EpisodeState& state,
                              const Action& action);

// Applies a legal action. Reaching k_max selections ends the episode.
EpisodeState Apply(const EpisodeEnv& env, const EpisodeState& state,
                   const Action& action);

struct ScoredAction {
  Action action;
  double q = 0.0;
};

// Throws Error(kInvalidArgument) for a finished state.
std::vector<ScoredAction> QValues(const nn::Mlp& net, const EpisodeEnv& env,
                                  const EpisodeState& state);

// First maximal entry; ties resolve to enumeration order.
std::size_t ArgMax(std::span<const ScoredAction> qs);

// Epsilon-greedy; returns an index into `qs`.
std::size_t SelectAction(std::span<const ScoredAction> qs, double epsilon, Rng& rng);

struct Transition {
  std::vector<double> features;               // featurize(s, a)
  double reward = 0.0;                       // non-zero only when terminal
  std::vector<std::vector<double>> next;      // featurize(s', a') for legal a'
  bool terminal = false;
};

enum class Mode { kTrain, kEval };

struct RunOptions {
  Mode mode = Mode::kEval;
  double epsilon = 0.0;       // ignored in eval mode
  Rng* rng = nullptr;         // required when epsilon > 0
  std::string episode_id;
};

struct EpisodeResult {
  EpisodeTrace trace;
  std::vector<Transition> transitions;  // empty in eval mode
};

// Template step, doc steps, aggregation, reasoner call, programmatic reward
// (when the instance has ground truth). The reward sits on the terminal
// transition only.
EpisodeResult RunEpisode(const nn::Mlp& net, const EpisodeEnv& env,
                         std::span<const PromptTemplate> templates,
                         Reasoner& reasoner, const RunOptions& options);

// Renders, aggregates and answers a fixed (template, pool positions) choice.
// Used by baselines, the oracle and trace replay.
EpisodeTrace ExecuteChoice(const EpisodeEnv& env,
                           std::span<const PromptTemplate> templates,
                           Reasoner& reasoner, int template_id,
                           std::span<const std::size_t> positions);

// Rebuilds the transitions of a stored trace with `reward` on the terminal
// step. Throws if the trace does not replay in this environment.
std::vector<Transition> TransitionsFromTrace(const EpisodeEnv& env,
                                             const EpisodeTrace& trace,
                                             double reward);

}  // namespace rlrag::rl

#endif  // RLRAG_EPISODE_HPP_
