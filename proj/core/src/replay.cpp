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

#include "rlrag/replay.hpp"

#include <algorithm>

#include "rlrag/error.hpp"

namespace rlrag::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw Error(ErrorCode::kInvalidArgument, "replay capacity must be positive");
  }
  slots_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::Push(Transition t) {
  if (t.terminal && !t.next.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "terminal transition with next actions");
  }
  if (!t.terminal && t.next.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "non-terminal transition without next actions");
  }
  if (slots_.size() < capacity_) {
    slots_.push_back(std::move(t));
  } else {
    slots_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
  ++inserted_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= slots_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "replay index out of range");
  }
  return slots_[(head_ + i) % slots_.size()];
}

std::vector<std::size_t> ReplayBuffer::SampleIndices(std::size_t batch, Rng& rng) const {
  const std::size_t n = slots_.size();
  const std::size_t k = std::min(batch, n);
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = rng.uniform_index(j + 1);
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  return picked;
}

std::vector<const Transition*> ReplayBuffer::Sample(std::size_t batch, Rng& rng) const {
  std::vector<const Transition*> out;
  for (std::size_t i : SampleIndices(batch, rng)) out.push_back(&at(i));
  return out;
}

}  // namespace rlrag::rl
