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

#include "rlrag/episode.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <iterator>

#include "rlrag/error.hpp"
#include "rlrag/io.hpp"
#include "rlrag/reward.hpp"

namespace rlrag::rl {

nlohmann::json EpisodeConfigToJson(const EpisodeConfig& c) {
  return {{"pool_size", c.pool_size},
          {"k_max", c.k_max},
          {"n_templates", c.n_templates},
          {"context_budget", c.context_budget}};
}

EpisodeConfig EpisodeConfigFromJson(const nlohmann::json& j) {
  RequireOnlyKeys(j, {"pool_size", "k_max", "n_templates", "context_budget"}, "episode config");
  EpisodeConfig c;
  try {
    if (j.contains("pool_size")) c.pool_size = j["pool_size"].get<std::size_t>();
    if (j.contains("k_max")) c.k_max = j["k_max"].get<std::size_t>();
    if (j.contains("n_templates")) c.n_templates = j["n_templates"].get<std::size_t>();
    if (j.contains("context_budget")) c.context_budget = j["context_budget"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("bad episode config: {}", e.what()));
  }
  return c;
}
namespace {

std::vector<std::string> SortedUnique(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

double Jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

[[noreturn]] void Illegal(const Action& action, std::string_view rule) {
  throw Error(ErrorCode::kIllegalAction,
              fmt::format("illegal action {}: {}", action.Label(), rule));
}

// Turns an action sequence into transitions; the last one is terminal.
std::vector<Transition> BuildTransitions(const EpisodeEnv& env,
                                         std::span<const Action> actions,
                                         double reward) {
  std::vector<Transition> out;
  EpisodeState state;
  for (const Action& a : actions) {
    if (state.phase == Phase::kDone) {
      throw Error(ErrorCode::kIllegalAction, "actions continue past the end");
    }
    if (!out.empty()) {
      for (const Action& next : LegalActions(env, state)) {
        out.back().next.push_back(Featurize(env, state, next));
      }
    }
    out.push_back(Transition{Featurize(env, state, a), 0.0, {}, false});
    state = Apply(env, state, a);
  }
  if (state.phase != Phase::kDone) {
    throw Error(ErrorCode::kInvalidArgument, "action sequence does not finish the episode");
  }
  out.back().terminal = true;
  out.back().reward = reward;
  return out;
}

}  // namespace

EpisodeEnv::EpisodeEnv(const InvertedIndex& index, const TaskInstance& instance,
                       const EpisodeConfig& config)
    : instance_(instance), config_(config), query_tokens_(Tokenize(instance.query)) {
  if (config_.pool_size == 0 || config_.k_max == 0) {
    throw Error(ErrorCode::kInvalidArgument, "pool_size and k_max must be positive");
  }
  if (config_.n_templates == 0 || config_.n_templates > 4) {
    throw Error(ErrorCode::kInvalidArgument,
                "the feature layout has 4 template slots; n_templates must be 1..4");
  }
  pool_ = index.TopN(query_tokens_, config_.pool_size, instance_.instance_id);
  const double max_score = pool_.max_score();
  const double avg_len = index.avg_doc_len().value_or(1.0);
  const auto query_set = SortedUnique(query_tokens_);
  for (std::size_t p = 0; p < pool_.entries.size(); ++p) {
    Candidate c;
    c.doc = &index.document(pool_.entries[p].doc_id);
    c.score = pool_.entries[p].score;
    c.score_norm = max_score > 0.0 ? c.score / max_score : 0.0;
    c.rank_norm = static_cast<double>(p) / static_cast<double>(config_.pool_size);
    c.token_set = SortedUnique(c.doc->tokens);
    c.query_overlap = Jaccard(query_set, c.token_set);
    const double ratio = static_cast<double>(c.doc->tokens.size()) / avg_len;
    c.length_feature = std::min(ratio, 2.0) / 2.0;
    candidates_.push_back(std::move(c));
  }
}

std::string Action::Label() const {
  switch (kind) {
    case Kind::kChooseTemplate: return fmt::format("T{}", index);
    case Kind::kSelectDoc: return fmt::format("D{}", index);
    case Kind::kStop: return "STOP";
  }
  return "?";
}

std::vector<Action> LegalActions(const EpisodeEnv& env, const EpisodeState& state) {
  std::vector<Action> legal;
  switch (state.phase) {
    case Phase::kChooseTemplate:
      for (std::size_t t = 0; t < env.config().n_templates; ++t) {
        legal.push_back(Action::ChooseTemplate(t));
      }
      break;
    case Phase::kChooseDocs:
      for (std::size_t p = 0; p < env.candidates().size(); ++p) {
        if (std::find(state.selected.begin(), state.selected.end(), p) ==
            state.selected.end()) {
          legal.push_back(Action::SelectDoc(p));
        }
      }
      if (!state.selected.empty()) legal.push_back(Action::Stop());
      break;
    case Phase::kDone:
      break;
  }
  return legal;
}

void CheckLegal(const EpisodeEnv& env, const EpisodeState& state, const Action& action) {
  if (state.phase == Phase::kDone) Illegal(action, "the episode is finished");
  switch (action.kind) {
    case Action::Kind::kChooseTemplate:
      if (state.phase != Phase::kChooseTemplate) {
        Illegal(action, "templates are chosen only in the first phase");
      }
      if (action.index >= env.config().n_templates) {
        Illegal(action, "template id out of range");
      }
      return;
    case Action::Kind::kSelectDoc:
      if (state.phase != Phase::kChooseDocs) {
        Illegal(action, "documents are selected only after the template");
      }
      if (action.index >= env.candidates().size()) {
        Illegal(action, "pool position out of range");
      }
      if (std::find(state.selected.begin(), state.selected.end(), action.index) !=
          state.selected.end()) {
        Illegal(action, "document already selected");
      }
      if (state.selected.size() >= env.config().k_max) {
        Illegal(action, "support set is full");
      }
      return;
    case Action::Kind::kStop:
      if (state.phase != Phase::kChooseDocs) {
        Illegal(action, "stop is allowed only in the document phase");
      }
      if (state.selected.empty()) {
        Illegal(action, "the support set may not be empty");
      }
      return;
  }
}

std::vector<double> Featurize(const EpisodeEnv& env, const EpisodeState& state,
                              const Action& action) {
  CheckLegal(env, state, action);
  std::vector<double> f(kFeatureCount, 0.0);
  const auto& cfg = env.config();
  f[0] = state.phase == Phase::kChooseDocs ? 1.0 : 0.0;
  f[1] = static_cast<double>(state.selected.size()) / static_cast<double>(cfg.k_max);
  f[2] = action.kind == Action::Kind::kStop ? 1.0 : 0.0;
  const std::size_t t = action.kind == Action::Kind::kChooseTemplate
                            ? action.index
                            : static_cast<std::size_t>(*state.template_id);
  f[3 + t] = 1.0;
  if (action.kind == Action::Kind::kSelectDoc) {
    const Candidate& c = env.candidates()[action.index];
    f[7] = c.score_norm;
    f[8] = c.rank_norm;
    f[9] = c.query_overlap;
    double overlap = 0.0;
    for (std::size_t s : state.selected) {
      overlap = std::max(overlap, Jaccard(c.token_set, env.candidates()[s].token_set));
    }
    f[10] = overlap;
    f[11] = c.length_feature;
  }
  return f;
}

EpisodeState Apply(const EpisodeEnv& env, const EpisodeState& state, const Action& action) {
  CheckLegal(env, state, action);
  EpisodeState next = state;
  ++next.step;
  switch (action.kind) {
    case Action::Kind::kChooseTemplate:
      next.template_id = static_cast<int>(action.index);
      next.phase = Phase::kChooseDocs;
      break;
    case Action::Kind::kSelectDoc:
      next.selected.push_back(action.index);
      if (next.selected.size() >= env.config().k_max) next.phase = Phase::kDone;
      break;
    case Action::Kind::kStop:
      next.phase = Phase::kDone;
      break;
  }
  return next;
}

std::vector<ScoredAction> QValues(const nn::Mlp& net, const EpisodeEnv& env,
                                  const EpisodeState& state) {
  if (state.phase == Phase::kDone) {
    throw Error(ErrorCode::kInvalidArgument, "no Q-values for a finished episode");
  }
  std::vector<ScoredAction> out;
  for (const Action& a : LegalActions(env, state)) {
    out.push_back(ScoredAction{a, net.ForwardScalar(Featurize(env, state, a))});
  }
  return out;
}

std::size_t ArgMax(std::span<const ScoredAction> qs) {
  if (qs.empty()) throw Error(ErrorCode::kInvalidArgument, "argmax of no actions");
  std::size_t best = 0;
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if (qs[i].q > qs[best].q) best = i;
  }
  return best;
}

std::size_t SelectAction(std::span<const ScoredAction> qs, double epsilon, Rng& rng) {
  if (qs.empty()) throw Error(ErrorCode::kInvalidArgument, "no legal actions");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be in [0, 1]");
  }
  if (qs.size() == 1) return 0;
  if (epsilon > 0.0 && rng.uniform01() < epsilon) return rng.uniform_index(qs.size());
  return ArgMax(qs);
}

EpisodeTrace ExecuteChoice(const EpisodeEnv& env, std::span<const PromptTemplate> templates,
                           Reasoner& reasoner, int template_id,
                           std::span<const std::size_t> positions) {
  if (template_id < 0 || static_cast<std::size_t>(template_id) >= templates.size() ||
      templates[static_cast<std::size_t>(template_id)].template_id != template_id) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("template {} is not in the library", template_id));
  }
  if (positions.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "support set may not be empty");
  }
  const TaskInstance& inst = env.instance();
  EpisodeTrace trace;
  trace.instance_id = inst.instance_id;
  trace.task_description = inst.task_description;
  trace.query = inst.query;
  trace.template_id = template_id;
  trace.pool_max_score = env.pool().max_score();
  trace.pool_size = env.pool().size();

  std::vector<Document> group;
  for (std::size_t p : positions) {
    if (p >= env.candidates().size()) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("pool position {} out of range", p));
    }
    const Candidate& c = env.candidates()[p];
    trace.support.push_back(c.doc->id);
    trace.support_scores.push_back(c.score);
    group.push_back(*c.doc);
  }
  const std::string rendered = RenderPrompt(templates[static_cast<std::size_t>(template_id)],
                                            inst.task_description, inst.query);
  const AggregatedPrompt prompt = Aggregate(rendered, {group}, env.config().context_budget);
  trace.dropped = prompt.dropped_doc_ids;
  trace.prompt = prompt.final_text;
  const auto included = prompt.IncludedDocIds();
  trace.response = reasoner.Answer(prompt, inst, included);
  if (inst.has_ground_truth()) {
    trace.reward = ProgrammaticReward(trace.response->text, inst);
  }
  trace.damaging_included =
      std::any_of(included.begin(), included.end(),
                  [&](const std::string& id) { return inst.damaging.count(id) != 0; });
  return trace;
}

EpisodeResult RunEpisode(const nn::Mlp& net, const EpisodeEnv& env,
                         std::span<const PromptTemplate> templates, Reasoner& reasoner,
                         const RunOptions& options) {
  if (env.candidates().empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("no candidate documents for '{}'", env.instance().instance_id));
  }
  if (templates.size() < env.config().n_templates) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} templates configured but the library has {}",
                            env.config().n_templates, templates.size()));
  }
  const bool train = options.mode == Mode::kTrain;
  const double epsilon = train ? options.epsilon : 0.0;
  if (epsilon > 0.0 && options.rng == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "exploration needs an rng");
  }

  EpisodeState state;
  std::vector<Action> taken;
  std::vector<StepValues> steps;
  while (state.phase != Phase::kDone) {
    const auto qs = QValues(net, env, state);
    const std::size_t pick =
        epsilon > 0.0 ? SelectAction(qs, epsilon, *options.rng) : ArgMax(qs);
    StepValues sv;
    sv.chosen = pick;
    for (const auto& sa : qs) sv.values.push_back(ActionValue{sa.action.Label(), sa.q});
    steps.push_back(std::move(sv));
    taken.push_back(qs[pick].action);
    state = Apply(env, state, qs[pick].action);
  }

  EpisodeResult result;
  result.trace = ExecuteChoice(env, templates, reasoner, *state.template_id, state.selected);
  result.trace.episode_id = options.episode_id;
  result.trace.q_values = std::move(steps);
  if (train) {
    const double reward = result.trace.reward ? result.trace.reward->value : 0.0;
    result.transitions = BuildTransitions(env, taken, reward);
  }
  return result;
}

std::vector<Transition> TransitionsFromTrace(const EpisodeEnv& env, const EpisodeTrace& trace,
                                             double reward) {
  if (!trace.template_id) {
    throw Error(ErrorCode::kInvalidArgument, "trace has no template");
  }
  std::vector<Action> actions{Action::ChooseTemplate(static_cast<std::size_t>(*trace.template_id))};
  for (const auto& id : trace.support) {
    auto it = std::find_if(env.candidates().begin(), env.candidates().end(),
                           [&](const Candidate& c) { return c.doc->id == id; });
    if (it == env.candidates().end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("trace doc '{}' is not in the candidate pool", id));
    }
    actions.push_back(Action::SelectDoc(
        static_cast<std::size_t>(std::distance(env.candidates().begin(), it))));
  }
  if (trace.support.size() < env.config().k_max) actions.push_back(Action::Stop());
  return BuildTransitions(env, actions, reward);
}

}  // namespace rlrag::rl
