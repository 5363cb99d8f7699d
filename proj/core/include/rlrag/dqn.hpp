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

#ifndef RLRAG_DQN_HPP_
#define RLRAG_DQN_HPP_

#include <span>
#include <vector>

#include "rlrag/episode.hpp"
#include "rlrag/tinynn.hpp"

namespace rlrag::rl {

// y = r for terminal transitions, r + gamma * max_a' Q_target(s', a')
// otherwise.
std::vector<double> BellmanTargets(std::span<const Transition* const> batch,
                                   const nn::Mlp& target_net, double gamma);

struct LossAndGradients {
  double loss = 0.0;
  nn::Gradients grads;
};

// Mean squared error between Q(s, a) and the Bellman targets, with its
// gradient with respect to the online net. Targets are held fixed.
LossAndGradients DqnLoss(const nn::Mlp& net, const nn::Mlp& target_net,
                         std::span<const Transition* const> batch, double gamma);

// One SGD step on DqnLoss. Returns the pre-step loss. A non-finite loss
// throws Error(kNonFinite) and leaves `net` untouched.
double DqnUpdate(nn::Mlp& net, const nn::Mlp& target_net,
                 std::span<const Transition* const> batch, double gamma, double lr);

}  // namespace rlrag::rl

#endif  // RLRAG_DQN_HPP_
