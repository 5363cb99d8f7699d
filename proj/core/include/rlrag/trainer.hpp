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

#ifndef RLRAG_TRAINER_HPP_
#define RLRAG_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlrag/corpus.hpp"
#include "rlrag/episode.hpp"
#include "rlrag/prompting.hpp"
#include "rlrag/reasoner.hpp"
#include "rlrag/replay.hpp"
#include "rlrag/reward.hpp"
#include "rlrag/tinynn.hpp"

namespace rlrag::rl {

struct TrainConfig {
  double gamma = 0.99;
  double lr = 0.01;
  std::size_t batch = 32;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t epsilon_decay_steps = 2000;  // action steps
  std::size_t target_sync = 100;           // gradient steps between syncs
  std::size_t max_episodes = 5000;
  std::size_t warmup = 200;                // transitions before learning
  std::size_t replay_capacity = 10000;
  // "Stops improving": after exploration has finished, W-episode window
  // means that fail to beat the best window by `tolerance` for `patience`
  // consecutive windows end training.
  std::size_t convergence_window = 50;
  double convergence_tolerance = 1e-3;
  std::size_t convergence_patience = 3;
  std::vector<std::size_t> hidden = {64, 32};
  std::uint64_t seed = 7;
  EpisodeConfig episode;
};

// Throws Error(kInvalidArgument) on out-of-range values.
void ValidateConfig(const TrainConfig& config);
nlohmann::json ConfigToJson(const TrainConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig ConfigFromJson(const nlohmann::json& j);

// Epsilon after `steps` action steps.
double EpsilonAt(const TrainConfig& config, std::uint64_t steps);

struct EpisodeMetrics {
  std::size_t episode = 0;
  double reward = 0.0;
  std::optional<double> loss;  // absent before warmup
  double epsilon = 0.0;
  std::size_t support_size = 0;
  bool damaging_included = false;
  int template_id = 0;
};

inline constexpr std::string_view kMetricsHeader =
    "episode,reward,loss,epsilon,support_size,damaging_included,template_id";

std::string MetricsCsv(std::span<const EpisodeMetrics> metrics);
// One data line, newline-terminated.
std::string MetricsCsvRow(const EpisodeMetrics& m);
std::vector<EpisodeMetrics> ParseMetricsCsv(std::string_view csv);
nlohmann::json MetricsToJson(std::span<const EpisodeMetrics> metrics);

struct TrainResult {
  nn::Mlp online;
  nn::Mlp target;
  std::vector<EpisodeMetrics> metrics;
  std::size_t updates = 0;
  std::uint64_t action_steps = 0;
  bool converged = false;
};

nn::Mlp MakeQNetwork(const TrainConfig& config);

// Single-threaded DQN loop; identical inputs give identical results.
class Trainer {
 public:
  using HumanRewardFn = std::function<std::optional<double>(const std::string&)>;

  Trainer(const InvertedIndex& index, std::vector<TaskInstance> instances,
          TrainConfig config, std::vector<PromptTemplate> templates,
          Reasoner& reasoner);

  // Episode id -> human rating. Overrides the programmatic reward.
  void SetHumanRewardLookup(HumanRewardFn fn) { human_reward_ = std::move(fn); }
  // Fallback for episodes with neither a rating nor ground truth.
  void SetRewardModel(const RewardModel* model) { reward_model_ = model; }
  // Called after every episode, so callers can flush metrics as they go.
  void SetEpisodeCallback(std::function<void(const EpisodeMetrics&)> fn) {
    on_episode_ = std::move(fn);
  }

  // Replays a stored trace into the buffer, reward resolved by precedence.
  // Returns the reward used, or nullopt if none was available.
  std::optional<RewardOutcome> IngestTrace(const EpisodeTrace& trace,
                                           const TaskInstance& instance);

  TrainResult Run();

  const ReplayBuffer& replay() const { return replay_; }
  const nn::Mlp& online() const { return online_; }
  const nn::Mlp& target() const { return target_; }

 private:
  std::optional<RewardOutcome> Resolve(const EpisodeTrace& trace) const;
  const EpisodeEnv& EnvFor(const TaskInstance& instance);

  const InvertedIndex& index_;
  std::vector<TaskInstance> instances_;
  TrainConfig config_;
  std::vector<PromptTemplate> templates_;
  Reasoner& reasoner_;
  HumanRewardFn human_reward_;
  const RewardModel* reward_model_ = nullptr;
  std::function<void(const EpisodeMetrics&)> on_episode_;
  std::vector<EpisodeEnv> envs_;
  std::map<std::string, std::size_t> extra_env_index_;
  std::vector<EpisodeEnv> extra_envs_;
  ReplayBuffer replay_;
  nn::Mlp online_;
  nn::Mlp target_;
  Rng rng_;
};

TrainResult Train(const InvertedIndex& index, std::vector<TaskInstance> instances,
                  const TrainConfig& config, std::vector<PromptTemplate> templates,
                  Reasoner& reasoner);

}  // namespace rlrag::rl

#endif  // RLRAG_TRAINER_HPP_
