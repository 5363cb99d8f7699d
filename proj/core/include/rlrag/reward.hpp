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

#ifndef RLRAG_REWARD_HPP_
#define RLRAG_REWARD_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlrag/reasoner.hpp"
#include "rlrag/tinynn.hpp"
#include "rlrag/trace.hpp"

namespace rlrag {

// F1 over Tokenize() multisets. Both empty -> 1, exactly one empty -> 0.
double TokenF1(std::string_view prediction, std::string_view gold);

// Lowercase + trim.
std::string NormalizeAnswer(std::string_view text);

// gold -> (1, correct); "UNKNOWN" -> (0, abstain); any distractor ->
// (-1, hallucination); otherwise token F1 as a partial reward. An F1 of
// exactly 1 counts as correct and exactly 0 as abstain.
RewardOutcome ProgrammaticReward(std::string_view response_text,
                                 const TaskInstance& instance);

enum class Rating : int { kBadHallucination = -1, kUnsure = 0, kGood = 1 };
std::optional<Rating> RatingFromInt(std::int64_t value);

struct FeedbackRecord {
  std::string episode_id;
  Rating rating = Rating::kUnsure;
  std::string rater;
  std::int64_t ts = 0;  // unix milliseconds

  friend bool operator==(const FeedbackRecord&, const FeedbackRecord&) = default;
};

nlohmann::json FeedbackToJson(const FeedbackRecord& record);
FeedbackRecord FeedbackFromJson(const nlohmann::json& j, const std::string& where);

// Human ratings, last write wins per (episode_id, rater). When constructed
// with a path the store replays that append-only JSONL log and appends every
// submission to it. Writes are serialized; reads return copies.
class FeedbackStore {
 public:
  FeedbackStore() = default;
  explicit FeedbackStore(std::string path);

  FeedbackStore(const FeedbackStore&) = delete;
  FeedbackStore& operator=(const FeedbackStore&) = delete;

  void Submit(const FeedbackRecord& record);
  std::vector<FeedbackRecord> ForEpisode(const std::string& episode_id) const;
  std::vector<FeedbackRecord> All() const;
  std::size_t size() const;

  // Mean of the current ratings for the episode, if any rater has one.
  std::optional<double> HumanReward(const std::string& episode_id) const;

 private:
  void Apply(const FeedbackRecord& record);

  std::string path_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, FeedbackRecord> live_;
};

// human > programmatic > reward model. Returns nullopt when none exists.
std::optional<RewardOutcome> ResolveReward(
    std::optional<double> human, std::optional<RewardOutcome> programmatic,
    std::optional<double> model_prediction);

inline constexpr std::size_t kEpisodeFeatureCount = 10;
using EpisodeFeatures = std::array<double, kEpisodeFeatureCount>;

// [support size / k_max, mean support BM25 / pool max, min support BM25 /
//  pool max, template one-hot (4), answer tokens / 64 (clipped),
//  answered-UNKNOWN flag, query tokens / 32 (clipped)].
// Throws Error(kInvalidArgument) for an incomplete trace.
EpisodeFeatures FeaturizeEpisode(const EpisodeTrace& trace,
                                 std::size_t k_max = 3);

struct RewardModel {
  nn::Mlp net;
  std::vector<double> loss_log;  // training-set MSE after each epoch
  // Per-feature z-score fitted on the first training set. Empty means the
  // features go in raw.
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;

  std::vector<double> NetInput(const EpisodeFeatures& f) const;

  static RewardModel Zero(std::vector<std::size_t> hidden = {16});
  static RewardModel Init(std::uint64_t seed, std::vector<std::size_t> hidden = {16});
};

struct RewardExample {
  FeedbackRecord feedback;
  EpisodeTrace trace;
};

double RewardModelMse(const RewardModel& model,
                      const std::vector<RewardExample>& examples);

// Per-sample SGD on squared error, visiting examples in a freshly shuffled
// order each epoch. A model without standardization gets it fitted on
// `examples` first; zero epochs return the model unchanged.
RewardModel TrainRewardModel(RewardModel model,
                             const std::vector<RewardExample>& examples,
                             std::size_t epochs, double lr, std::uint64_t seed);

// Net output clamped to [-1, 1].
double PredictReward(const RewardModel& model, const EpisodeTrace& trace);

// {"net": <tinynn checkpoint>, "loss_log": [...]}.
std::string SaveRewardModel(const RewardModel& model);
RewardModel LoadRewardModel(std::string_view bytes);

}  // namespace rlrag

#endif  // RLRAG_REWARD_HPP_
