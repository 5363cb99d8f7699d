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

#include "rlrag/reward.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rlrag/corpus.hpp"
#include "rlrag/error.hpp"
#include "rlrag/io.hpp"
#include "rlrag/rng.hpp"

namespace rlrag {

double TokenF1(std::string_view prediction, std::string_view gold) {
  const auto p = Tokenize(prediction);
  const auto g = Tokenize(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : g) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::string NormalizeAnswer(std::string_view text) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const std::size_t begin = text.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) return {};
  const std::size_t end = text.find_last_not_of(kSpace);
  std::string out(text.substr(begin, end - begin + 1));
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

RewardOutcome ProgrammaticReward(std::string_view response_text,
                                 const TaskInstance& instance) {
  const std::string answer = NormalizeAnswer(response_text);
  if (answer == NormalizeAnswer(instance.gold_answer)) {
    return {1.0, RewardKind::kCorrect, RewardSource::kProgrammatic};
  }
  if (answer == NormalizeAnswer(kUnknownAnswer)) {
    return {0.0, RewardKind::kAbstain, RewardSource::kProgrammatic};
  }
  for (const auto& [id, distractor] : instance.damaging) {
    if (answer == NormalizeAnswer(distractor)) {
      return {-1.0, RewardKind::kHallucination, RewardSource::kProgrammatic};
    }
  }
  const double f1 = TokenF1(answer, instance.gold_answer);
  if (f1 >= 1.0) return {1.0, RewardKind::kCorrect, RewardSource::kProgrammatic};
  if (f1 <= 0.0) return {0.0, RewardKind::kAbstain, RewardSource::kProgrammatic};
  return {f1, RewardKind::kPartial, RewardSource::kProgrammatic};
}

std::optional<Rating> RatingFromInt(std::int64_t value) {
  switch (value) {
    case -1: return Rating::kBadHallucination;
    case 0: return Rating::kUnsure;
    case 1: return Rating::kGood;
    default: return std::nullopt;
  }
}

nlohmann::json FeedbackToJson(const FeedbackRecord& r) {
  return {{"episode_id", r.episode_id},
          {"rating", static_cast<int>(r.rating)},
          {"rater", r.rater},
          {"ts", r.ts}};
}

FeedbackRecord FeedbackFromJson(const nlohmann::json& j, const std::string& where) {
  RequireOnlyKeys(j, {"episode_id", "rating", "rater", "ts"}, where);
  try {
    FeedbackRecord r;
    r.episode_id = j.at("episode_id").get<std::string>();
    const auto& rating = j.at("rating");
    if (!rating.is_number_integer()) {
      throw Error(ErrorCode::kSchema, fmt::format("{}: rating must be -1, 0 or 1", where));
    }
    auto parsed = RatingFromInt(rating.get<std::int64_t>());
    if (!parsed) {
      throw Error(ErrorCode::kSchema, fmt::format("{}: rating must be -1, 0 or 1", where));
    }
    r.rating = *parsed;
    r.rater = j.at("rater").get<std::string>();
    r.ts = j.at("ts").get<std::int64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("{}: {}", where, e.what()));
  }
}

FeedbackStore::FeedbackStore(std::string path) : path_(std::move(path)) {
  std::ifstream probe(path_);
  if (!probe) return;
  ForEachJsonLine(ReadFile(path_), path_,
                  [&](const nlohmann::json& j, std::size_t line) {
                    Apply(FeedbackFromJson(j, fmt::format("{}:{}", path_, line)));
                  });
}

void FeedbackStore::Apply(const FeedbackRecord& record) {
  live_[{record.episode_id, record.rater}] = record;
}

void FeedbackStore::Submit(const FeedbackRecord& record) {
  if (record.episode_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "feedback needs an episode_id");
  }
  std::lock_guard lock(mu_);
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << FeedbackToJson(record).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot append to '{}'", path_));
  }
  Apply(record);
}

std::vector<FeedbackRecord> FeedbackStore::ForEpisode(const std::string& episode_id) const {
  std::lock_guard lock(mu_);
  std::vector<FeedbackRecord> out;
  for (auto it = live_.lower_bound({episode_id, ""});
       it != live_.end() && it->first.first == episode_id; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<FeedbackRecord> FeedbackStore::All() const {
  std::lock_guard lock(mu_);
  std::vector<FeedbackRecord> out;
  for (const auto& [key, record] : live_) out.push_back(record);
  return out;
}

std::size_t FeedbackStore::size() const {
  std::lock_guard lock(mu_);
  return live_.size();
}

std::optional<double> FeedbackStore::HumanReward(const std::string& episode_id) const {
  const auto records = ForEpisode(episode_id);
  if (records.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& r : records) sum += static_cast<int>(r.rating);
  return sum / static_cast<double>(records.size());
}

std::optional<RewardOutcome> ResolveReward(
    std::optional<double> human, std::optional<RewardOutcome> programmatic,
    std::optional<double> model_prediction) {
  if (human) return RewardOutcome{*human, RewardKind::kHuman, RewardSource::kHuman};
  if (programmatic) return programmatic;
  if (model_prediction) {
    const double v = std::clamp(*model_prediction, -1.0, 1.0);
    // A model estimate carries no outcome class of its own; it is filed as
    // human-like feedback since that is what the model imitates.
    return RewardOutcome{v, RewardKind::kHuman, RewardSource::kRewardModel};
  }
  return std::nullopt;
}

EpisodeFeatures FeaturizeEpisode(const EpisodeTrace& trace, std::size_t k_max) {
  if (!trace.complete()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("episode '{}' is incomplete (needs template and "
                            "response)",
                            trace.episode_id));
  }
  if (k_max == 0) throw Error(ErrorCode::kInvalidArgument, "k_max must be positive");
  EpisodeFeatures f{};
  const std::size_t n = trace.support.size();
  f[0] = static_cast<double>(n) / static_cast<double>(k_max);
  if (n > 0 && trace.pool_max_score > 0.0) {
    const double sum = std::accumulate(trace.support_scores.begin(),
                                       trace.support_scores.end(), 0.0);
    const double min = *std::min_element(trace.support_scores.begin(),
                                         trace.support_scores.end());
    f[1] = sum / static_cast<double>(n) / trace.pool_max_score;
    f[2] = min / trace.pool_max_score;
  }
  const int t = *trace.template_id;
  if (t >= 0 && t < 4) f[3 + static_cast<std::size_t>(t)] = 1.0;
  const auto& text = trace.response->text;
  f[7] = std::min(1.0, static_cast<double>(Tokenize(text).size()) / 64.0);
  f[8] = NormalizeAnswer(text) == NormalizeAnswer(kUnknownAnswer) ? 1.0 : 0.0;
  f[9] = std::min(1.0, static_cast<double>(Tokenize(trace.query).size()) / 32.0);
  return f;
}

RewardModel RewardModel::Zero(std::vector<std::size_t> hidden) {
  std::vector<std::size_t> sizes{kEpisodeFeatureCount};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return RewardModel{nn::Mlp::Zeros(std::move(sizes)), {}, {}, {}};
}

RewardModel RewardModel::Init(std::uint64_t seed, std::vector<std::size_t> hidden) {
  std::vector<std::size_t> sizes{kEpisodeFeatureCount};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return RewardModel{nn::Mlp::Init(std::move(sizes), seed), {}, {}, {}};
}

std::vector<double> RewardModel::NetInput(const EpisodeFeatures& f) const {
  std::vector<double> x(f.begin(), f.end());
  if (feature_mean.empty()) return x;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - feature_mean[i]) / feature_scale[i];
  return x;
}

namespace {

void FitStandardization(RewardModel& model, const std::vector<EpisodeFeatures>& features) {
  const double n = static_cast<double>(features.size());
  model.feature_mean.assign(kEpisodeFeatureCount, 0.0);
  model.feature_scale.assign(kEpisodeFeatureCount, 1.0);
  for (std::size_t j = 0; j < kEpisodeFeatureCount; ++j) {
    double sum = 0.0;
    for (const auto& f : features) sum += f[j];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& f : features) ss += (f[j] - mean) * (f[j] - mean);
    const double sd = std::sqrt(ss / n);
    model.feature_mean[j] = mean;
    // Constant features are centred but not scaled.
    model.feature_scale[j] = sd > 1e-9 ? sd : 1.0;
  }
}

void CheckShape(const RewardModel& model) {
  if (model.net.layers().empty() ||
      model.net.input_size() != kEpisodeFeatureCount || model.net.output_size() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("reward model must map {} features to 1 output",
                            kEpisodeFeatureCount));
  }
}

}  // namespace

double RewardModelMse(const RewardModel& model,
                      const std::vector<RewardExample>& examples) {
  CheckShape(model);
  if (examples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : examples) {
    const auto x = model.NetInput(FeaturizeEpisode(ex.trace));
    const double err =
        model.net.ForwardScalar(x) - static_cast<double>(static_cast<int>(ex.feedback.rating));
    sum += err * err;
  }
  return sum / static_cast<double>(examples.size());
}

RewardModel TrainRewardModel(RewardModel model,
                             const std::vector<RewardExample>& examples,
                             std::size_t epochs, double lr, std::uint64_t seed) {
  CheckShape(model);
  if (examples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "reward model needs at least one record");
  }
  if (epochs == 0) return model;
  std::vector<EpisodeFeatures> raw;
  std::vector<double> targets;
  for (const auto& ex : examples) {
    raw.push_back(FeaturizeEpisode(ex.trace));
    targets.push_back(static_cast<int>(ex.feedback.rating));
  }
  if (model.feature_mean.empty()) FitStandardization(model, raw);
  std::vector<std::vector<double>> features;
  for (const auto& f : raw) features.push_back(model.NetInput(f));
  Rng rng(seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t i : order) {
      const double err = model.net.ForwardScalar(features[i]) - targets[i];
      const double upstream = 2.0 * err;
      model.net.SgdStep(model.net.Backward(features[i], std::span(&upstream, 1)), lr);
    }
    model.loss_log.push_back(RewardModelMse(model, examples));
  }
  return model;
}

double PredictReward(const RewardModel& model, const EpisodeTrace& trace) {
  CheckShape(model);
  return std::clamp(model.net.ForwardScalar(model.NetInput(FeaturizeEpisode(trace))), -1.0, 1.0);
}

std::string SaveRewardModel(const RewardModel& model) {
  const nlohmann::json j = {{"net", nlohmann::json::parse(model.net.Save())},
                            {"loss_log", model.loss_log},
                            {"feature_mean", model.feature_mean},
                            {"feature_scale", model.feature_scale}};
  return j.dump() + "\n";
}

RewardModel LoadRewardModel(std::string_view bytes) {
  RewardModel model;
  try {
    const auto j = nlohmann::json::parse(bytes);
    RequireOnlyKeys(j, {"net", "loss_log", "feature_mean", "feature_scale"}, "reward model");
    model.net = nn::Mlp::Load(j.at("net").dump());
    if (j.contains("loss_log")) model.loss_log = j["loss_log"].get<std::vector<double>>();
    if (j.contains("feature_mean")) {
      model.feature_mean = j["feature_mean"].get<std::vector<double>>();
      model.feature_scale = j.at("feature_scale").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, fmt::format("bad reward model: {}", e.what()));
  }
  if (model.net.input_size() != kEpisodeFeatureCount || model.net.output_size() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("reward model must map {} features to 1 value", kEpisodeFeatureCount));
  }
  const bool standardized = !model.feature_mean.empty();
  if (standardized && (model.feature_mean.size() != kEpisodeFeatureCount ||
                       model.feature_scale.size() != kEpisodeFeatureCount ||
                       std::any_of(model.feature_scale.begin(), model.feature_scale.end(),
                                   [](double s) { return !(s > 0.0); }))) {
    throw Error(ErrorCode::kSchema, "reward model standardization has the wrong shape");
  }
  return model;
}

}  // namespace rlrag
