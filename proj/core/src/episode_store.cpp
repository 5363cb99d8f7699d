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

#include "rlrag/episode_store.hpp"

#include <fmt/format.h>

#include <fstream>

#include "rlrag/error.hpp"
#include "rlrag/io.hpp"

namespace rlrag {

EpisodeStore::EpisodeStore(std::string path) : path_(std::move(path)) {
  std::ifstream probe(path_);
  if (!probe) return;
  ForEachJsonLine(ReadFile(path_), path_, [&](const nlohmann::json& j, std::size_t line) {
    EpisodeTrace trace;
    try {
      trace = TraceFromJson(j);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{}:{}: {}", path_, line, e.what()));
    }
    if (by_id_.count(trace.episode_id) != 0) {
      throw Error(ErrorCode::kCorruptData,
                  fmt::format("{}:{}: duplicate episode id '{}'", path_, line, trace.episode_id));
    }
    by_id_.emplace(trace.episode_id, log_.size());
    log_.push_back(std::make_shared<const EpisodeTrace>(std::move(trace)));
  });
}

EpisodeStore::TracePtr EpisodeStore::AppendLocked(EpisodeTrace trace) {
  if (trace.episode_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "episode needs an id");
  }
  if (by_id_.count(trace.episode_id) != 0) {
    throw Error(ErrorCode::kDuplicateId,
                fmt::format("episode id '{}' already stored", trace.episode_id));
  }
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << DumpCompact(TraceToJson(trace)) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot append to '{}'", path_));
  }
  by_id_.emplace(trace.episode_id, log_.size());
  log_.push_back(std::make_shared<const EpisodeTrace>(std::move(trace)));
  return log_.back();
}

EpisodeStore::TracePtr EpisodeStore::Append(EpisodeTrace trace) {
  std::lock_guard lock(mu_);
  return AppendLocked(std::move(trace));
}

EpisodeStore::TracePtr EpisodeStore::AppendNew(EpisodeTrace trace) {
  std::lock_guard lock(mu_);
  std::size_t n = log_.size() + 1;
  while (by_id_.count(fmt::format("ep-{:06d}", n)) != 0) ++n;
  trace.episode_id = fmt::format("ep-{:06d}", n);
  return AppendLocked(std::move(trace));
}

EpisodeStore::TracePtr EpisodeStore::Get(const std::string& episode_id) const {
  std::lock_guard lock(mu_);
  auto it = by_id_.find(episode_id);
  return it == by_id_.end() ? nullptr : log_[it->second];
}

bool EpisodeStore::contains(const std::string& episode_id) const {
  std::lock_guard lock(mu_);
  return by_id_.count(episode_id) != 0;
}

std::size_t EpisodeStore::size() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

EpisodeStore::Page EpisodeStore::List(std::size_t limit, std::size_t offset) const {
  std::lock_guard lock(mu_);
  Page page;
  page.total = log_.size();
  if (offset >= log_.size()) return page;
  const std::size_t end = offset + std::min(limit, log_.size() - offset);
  page.items.assign(log_.begin() + static_cast<std::ptrdiff_t>(offset),
                    log_.begin() + static_cast<std::ptrdiff_t>(end));
  return page;
}

}  // namespace rlrag
