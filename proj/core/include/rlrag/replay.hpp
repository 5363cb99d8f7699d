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

#ifndef RLRAG_REPLAY_HPP_
#define RLRAG_REPLAY_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rlrag/episode.hpp"
#include "rlrag/rng.hpp"

namespace rlrag::rl {

// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void Push(Transition t);

  std::size_t size() const { return slots_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t inserted() const { return inserted_; }

  // i = 0 is the oldest live transition.
  const Transition& at(std::size_t i) const;

  // min(batch, size()) distinct slots, uniformly at random (Floyd's
  // algorithm). Returned as logical positions, oldest = 0.
  std::vector<std::size_t> SampleIndices(std::size_t batch, Rng& rng) const;
  std::vector<const Transition*> Sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> slots_;
  std::size_t head_ = 0;  // physical slot of the oldest entry once full
  std::uint64_t inserted_ = 0;
};

}  // namespace rlrag::rl

#endif  // RLRAG_REPLAY_HPP_
