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

#include "rlrag/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlrag/error.hpp"

namespace rlrag::rl {

std::vector<double> BellmanTargets(std::span<const Transition* const> batch,
                                   const nn::Mlp& target_net, double gamma) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  std::vector<double> y;
  y.reserve(batch.size());
  for (const Transition* t : batch) {
    if (t->terminal) {
      y.push_back(t->reward);
      continue;
    }
    if (t->next.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-terminal transition has no next actions");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& f : t->next) best = std::max(best, target_net.ForwardScalar(f));
    y.push_back(t->reward + gamma * best);
  }
  return y;
}

LossAndGradients DqnLoss(const nn::Mlp& net, const nn::Mlp& target_net,
                         std::span<const Transition* const> batch, double gamma) {
  const std::vector<double> y = BellmanTargets(batch, target_net, gamma);
  LossAndGradients out;
  out.grads = net.ZeroGradients();
  const double n = static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double q = net.ForwardScalar(batch[i]->features);
    const double err = q - y[i];
    out.loss += err * err / n;
    const double upstream = 2.0 * err / n;
    out.grads += net.Backward(batch[i]->features, std::span(&upstream, 1));
  }
  return out;
}

double DqnUpdate(nn::Mlp& net, const nn::Mlp& target_net,
                 std::span<const Transition* const> batch, double gamma, double lr) {
  LossAndGradients lg = DqnLoss(net, target_net, batch, gamma);
  if (!std::isfinite(lg.loss)) {
    throw Error(ErrorCode::kNonFinite, "non-finite DQN loss; step refused");
  }
  net.SgdStep(lg.grads, lr);
  return lg.loss;
}

}  // namespace rlrag::rl
