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

#ifndef RLRAG_EPISODE_STORE_HPP_
#define RLRAG_EPISODE_STORE_HPP_

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rlrag/trace.hpp"

namespace rlrag {

// Append-only episode log (JSONL, one trace per line) with an in-memory
// index by episode id. Opening an existing log replays it. Stored traces
// are never modified; readers share immutable copies.
class EpisodeStore {
 public:
  using TracePtr = std::shared_ptr<const EpisodeTrace>;

  EpisodeStore() = default;
  explicit EpisodeStore(std::string path);

  EpisodeStore(const EpisodeStore&) = delete;
  EpisodeStore& operator=(const EpisodeStore&) = delete;

  // Throws Error(kDuplicateId) for a reused id.
  TracePtr Append(EpisodeTrace trace);
  // Assigns the next "ep-NNNNNN" id and appends, atomically.
  TracePtr AppendNew(EpisodeTrace trace);

  TracePtr Get(const std::string& episode_id) const;
  bool contains(const std::string& episode_id) const;
  std::size_t size() const;

  struct Page {
    std::size_t total = 0;
    std::vector<TracePtr> items;
  };
  // Insertion order; out-of-range offsets give an empty page.
  Page List(std::size_t limit, std::size_t offset) const;

  const std::string& path() const { return path_; }

 private:
  TracePtr AppendLocked(EpisodeTrace trace);

  std::string path_;
  mutable std::mutex mu_;
  std::vector<TracePtr> log_;
  std::map<std::string, std::size_t> by_id_;
};

}  // namespace rlrag

#endif  // RLRAG_EPISODE_STORE_HPP_
