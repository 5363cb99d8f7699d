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

#include "rlrag/trainer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "rlrag/dqn.hpp"
#include "rlrag/error.hpp"
#include "rlrag/io.hpp"

namespace rlrag::rl {
namespace {

template <typename T>
void ReadField(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void ValidateConfig(const TrainConfig& c) {
  auto fail = [](std::string_view what) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("bad train config: {}", what));
  };
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (!(c.lr > 0.0)) fail("lr must be positive");
  if (c.batch == 0) fail("batch must be positive");
  if (!(c.epsilon_start >= 0.0 && c.epsilon_start <= 1.0)) fail("epsilon_start must be in [0, 1]");
  if (!(c.epsilon_end >= 0.0 && c.epsilon_end <= 1.0)) fail("epsilon_end must be in [0, 1]");
  if (c.target_sync == 0) fail("target_sync must be positive");
  if (c.replay_capacity == 0) fail("replay_capacity must be positive");
  if (c.convergence_window == 0) fail("convergence_window must be positive");
  if (c.convergence_patience == 0) fail("convergence_patience must be positive");
  if (c.episode.pool_size == 0 || c.episode.k_max == 0) fail("pool_size and k_max must be positive");
  if (c.episode.n_templates == 0 || c.episode.n_templates > 4) fail("n_templates must be 1..4");
  for (std::size_t h : c.hidden) {
    if (h == 0) fail("hidden layer sizes must be positive");
  }
}

nlohmann::json ConfigToJson(const TrainConfig& c) {
  return {{"gamma", c.gamma},
          {"lr", c.lr},
          {"batch", c.batch},
          {"epsilon_start", c.epsilon_start},
          {"epsilon_end", c.epsilon_end},
          {"epsilon_decay_steps", c.epsilon_decay_steps},
          {"target_sync", c.target_sync},
          {"max_episodes", c.max_episodes},
          {"warmup", c.warmup},
          {"replay_capacity", c.replay_capacity},
          {"convergence_window", c.convergence_window},
          {"convergence_tolerance", c.convergence_tolerance},
          {"convergence_patience", c.convergence_patience},
          {"hidden", c.hidden},
          {"seed", c.seed},
          {"episode", EpisodeConfigToJson(c.episode)}};
}

TrainConfig ConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  try {
    RequireOnlyKeys(j,
                    {"gamma", "lr", "batch", "epsilon_start", "epsilon_end",
                     "epsilon_decay_steps", "target_sync", "max_episodes", "warmup",
                     "replay_capacity", "convergence_window", "convergence_tolerance",
                     "convergence_patience", "hidden", "seed", "episode"},
                    "train config");
    ReadField(j, "gamma", c.gamma);
    ReadField(j, "lr", c.lr);
    ReadField(j, "batch", c.batch);
    ReadField(j, "epsilon_start", c.epsilon_start);
    ReadField(j, "epsilon_end", c.epsilon_end);
    ReadField(j, "epsilon_decay_steps", c.epsilon_decay_steps);
    ReadField(j, "target_sync", c.target_sync);
    ReadField(j, "max_episodes", c.max_episodes);
    ReadField(j, "warmup", c.warmup);
    ReadField(j, "replay_capacity", c.replay_capacity);
    ReadField(j, "convergence_window", c.convergence_window);
    ReadField(j, "convergence_tolerance", c.convergence_tolerance);
    ReadField(j, "convergence_patience", c.convergence_patience);
    ReadField(j, "hidden", c.hidden);
    ReadField(j, "seed", c.seed);
    if (j.contains("episode")) c.episode = EpisodeConfigFromJson(j["episode"]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("bad train config: {}", e.what()));
  }
  ValidateConfig(c);
  return c;
}

double EpsilonAt(const TrainConfig& c, std::uint64_t steps) {
  if (c.epsilon_decay_steps == 0 || steps >= c.epsilon_decay_steps) return c.epsilon_end;
  const double frac = static_cast<double>(steps) / static_cast<double>(c.epsilon_decay_steps);
  return c.epsilon_start + (c.epsilon_end - c.epsilon_start) * frac;
}

std::string MetricsCsvRow(const EpisodeMetrics& m) {
  return fmt::format("{},{:.6f},{},{:.6f},{},{},{}\n", m.episode, m.reward,
                     m.loss ? fmt::format("{:.9g}", *m.loss) : std::string(), m.epsilon,
                     m.support_size, m.damaging_included ? 1 : 0, m.template_id);
}

std::string MetricsCsv(std::span<const EpisodeMetrics> metrics) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& m : metrics) out += MetricsCsvRow(m);
  return out;
}

std::vector<EpisodeMetrics> ParseMetricsCsv(std::string_view csv) {
  std::vector<EpisodeMetrics> out;
  std::size_t pos = 0;
  bool header = true;
  std::size_t line_no = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      if (line != kMetricsHeader) {
        throw Error(ErrorCode::kSchema, "metrics CSV has an unexpected header");
      }
      header = false;
      continue;
    }
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cols.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols.size() != 7) {
      throw Error(ErrorCode::kSchema, fmt::format("metrics CSV line {} has {} columns", line_no, cols.size()));
    }
    try {
      EpisodeMetrics m;
      m.episode = std::stoul(cols[0]);
      m.reward = std::stod(cols[1]);
      if (!cols[2].empty()) m.loss = std::stod(cols[2]);
      m.epsilon = std::stod(cols[3]);
      m.support_size = std::stoul(cols[4]);
      m.damaging_included = cols[5] == "1";
      m.template_id = std::stoi(cols[6]);
      out.push_back(m);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kSchema, fmt::format("metrics CSV line {} is malformed", line_no));
    }
  }
  return out;
}

nlohmann::json MetricsToJson(std::span<const EpisodeMetrics> metrics) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : metrics) {
    arr.push_back({{"episode", m.episode},
                   {"reward", m.reward},
                   {"loss", m.loss ? nlohmann::json(*m.loss) : nlohmann::json(nullptr)},
                   {"epsilon", m.epsilon},
                   {"support_size", m.support_size},
                   {"damaging_included", m.damaging_included},
                   {"template_id", m.template_id}});
  }
  return arr;
}

nn::Mlp MakeQNetwork(const TrainConfig& config) {
  std::vector<std::size_t> sizes{kFeatureCount};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  return nn::Mlp::Init(std::move(sizes), config.seed);
}

Trainer::Trainer(const InvertedIndex& index, std::vector<TaskInstance> instances,
                 TrainConfig config, std::vector<PromptTemplate> templates,
                 Reasoner& reasoner)
    : index_(index),
      instances_(std::move(instances)),
      config_(std::move(config)),
      templates_(std::move(templates)),
      reasoner_(reasoner),
      replay_(config_.replay_capacity),
      rng_(config_.seed) {
  ValidateConfig(config_);
  if (templates_.size() < config_.episode.n_templates) {
    throw Error(ErrorCode::kInvalidArgument, "template library smaller than n_templates");
  }
  envs_.reserve(instances_.size());
  for (const auto& inst : instances_) envs_.emplace_back(index_, inst, config_.episode);
  online_ = MakeQNetwork(config_);
  target_ = online_;
}

std::optional<RewardOutcome> Trainer::Resolve(const EpisodeTrace& trace) const {
  std::optional<double> human;
  if (human_reward_) human = human_reward_(trace.episode_id);
  std::optional<double> predicted;
  if (!human && !trace.reward && reward_model_ != nullptr) {
    predicted = PredictReward(*reward_model_, trace);
  }
  return ResolveReward(human, trace.reward, predicted);
}

const EpisodeEnv& Trainer::EnvFor(const TaskInstance& instance) {
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    if (instances_[i].instance_id == instance.instance_id) return envs_[i];
  }
  auto it = extra_env_index_.find(instance.instance_id);
  if (it != extra_env_index_.end()) return extra_envs_[it->second];
  extra_envs_.emplace_back(index_, instance, config_.episode);
  extra_env_index_.emplace(instance.instance_id, extra_envs_.size() - 1);
  return extra_envs_.back();
}

std::optional<RewardOutcome> Trainer::IngestTrace(const EpisodeTrace& trace,
                                                  const TaskInstance& instance) {
  const auto outcome = Resolve(trace);
  if (!outcome) return std::nullopt;
  for (auto& t : TransitionsFromTrace(EnvFor(instance), trace, outcome->value)) {
    replay_.Push(std::move(t));
  }
  return outcome;
}

TrainResult Trainer::Run() {
  TrainResult result;
  if (config_.max_episodes > 0 && instances_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "training needs at least one instance");
  }
  std::vector<std::size_t> order(instances_.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = 0;
  double best_window = -std::numeric_limits<double>::infinity();
  std::size_t stale_windows = 0;
  double window_sum = 0.0;

  for (std::size_t ep = 0; ep < config_.max_episodes; ++ep) {
    if (cursor == 0) rng_.shuffle(std::span(order));
    const EpisodeEnv& env = envs_[order[cursor]];
    cursor = (cursor + 1) % order.size();

    const double epsilon = EpsilonAt(config_, result.action_steps);
    RunOptions opts{Mode::kTrain, epsilon, &rng_, fmt::format("train-{:06d}", ep)};
    EpisodeResult er = RunEpisode(online_, env, templates_, reasoner_, opts);
    const auto outcome = Resolve(er.trace);
    if (!outcome) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("no reward available for instance '{}'", env.instance().instance_id));
    }
    er.trace.reward = outcome;
    er.transitions.back().reward = outcome->value;
    result.action_steps += er.transitions.size();
    for (auto& t : er.transitions) replay_.Push(std::move(t));

    EpisodeMetrics m;
    m.episode = ep;
    m.reward = outcome->value;
    m.epsilon = epsilon;
    m.support_size = er.trace.support.size();
    m.damaging_included = er.trace.damaging_included;
    m.template_id = *er.trace.template_id;
    if (replay_.size() >= config_.warmup && replay_.size() > 0) {
      const auto batch = replay_.Sample(config_.batch, rng_);
      m.loss = DqnUpdate(online_, target_, batch, config_.gamma, config_.lr);
      ++result.updates;
      if (result.updates % config_.target_sync == 0) target_ = online_;
    }
    result.metrics.push_back(m);
    if (on_episode_) on_episode_(m);

    window_sum += m.reward;
    if ((ep + 1) % config_.convergence_window == 0) {
      const double mean = window_sum / static_cast<double>(config_.convergence_window);
      window_sum = 0.0;
      if (result.action_steps >= config_.epsilon_decay_steps) {
        if (mean > best_window + config_.convergence_tolerance) {
          best_window = mean;
          stale_windows = 0;
        } else if (++stale_windows >= config_.convergence_patience) {
          result.converged = true;
          break;
        }
      }
    }
  }
  result.online = online_;
  result.target = target_;
  return result;
}

TrainResult Train(const InvertedIndex& index, std::vector<TaskInstance> instances,
                  const TrainConfig& config, std::vector<PromptTemplate> templates,
                  Reasoner& reasoner) {
  Trainer trainer(index, std::move(instances), config, std::move(templates), reasoner);
  return trainer.Run();
}

}  // namespace rlrag::rl
