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

#include "rlrag/tinynn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rlrag/error.hpp"
#include "rlrag/rng.hpp"
#include "test_support.hpp"

namespace rlrag::nn {
namespace {

Mlp Golden221() {
  Mlp net = Mlp::Zeros({2, 2, 1});
  auto& l = net.mutable_layers();
  l[0].weights = {0.5, -0.3, 0.8, 0.2};
  l[0].bias = {0.1, -0.1};
  l[1].weights = {1.5, -2.0};
  l[1].bias = {0.3};
  return net;
}

TEST(MlpTest, ForwardMatchesHandComputedValue) {
  const std::vector<double> x{1.0, 2.0};
  const double expected = rlrag::testing::Goldens()["mlp_221"].get<double>();
  EXPECT_NEAR(Golden221().ForwardScalar(x), expected, 1e-12);
  EXPECT_NEAR(Golden221().ForwardScalar(x), 1.5 * std::tanh(0.0) - 2.0 * std::tanh(1.1) + 0.3,
              1e-12);
}

TEST(MlpTest, InitIsSeededAndBounded) {
  const Mlp a = Mlp::Init({12, 8, 3}, 9);
  const Mlp b = Mlp::Init({12, 8, 3}, 9);
  const Mlp c = Mlp::Init({12, 8, 3}, 10);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  const double s0 = std::sqrt(6.0 / 20.0);
  for (double w : a.layers()[0].weights) EXPECT_LE(std::abs(w), s0);
  for (double v : a.layers()[0].bias) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(a.parameter_count(), 12u * 8 + 8 + 8 * 3 + 3);
}

TEST(MlpTest, BackwardMatchesFiniteDifferences) {
  const Mlp net = Mlp::Init({4, 8, 3}, 123);
  Rng rng(5);
  std::vector<double> x(4), up(3);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (double& v : up) v = rng.uniform(-1.0, 1.0);
  const auto objective = [&](const Mlp& m) {
    const auto y = m.Forward(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * up[i];
    return s;
  };
  const auto analytic = net.Backward(x, up).Flatten();
  const auto params = net.FlatParameters();
  ASSERT_EQ(analytic.size(), params.size());
  const double h = 1e-5;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mlp plus = net, minus = net;
    auto p = params;
    p[i] += h;
    plus.SetFlatParameters(p);
    p[i] -= 2 * h;
    minus.SetFlatParameters(p);
    const double numeric = (objective(plus) - objective(minus)) / (2 * h);
    const double denom = std::max({1e-8, std::abs(numeric), std::abs(analytic[i])});
    EXPECT_LT(std::abs(numeric - analytic[i]) / denom, 1e-4) << "param " << i;
  }
}

TEST(MlpTest, SaveLoadIsBitExact) {
  Mlp net = Mlp::Init({5, 7, 2}, 77);
  auto p = net.FlatParameters();
  p[3] = 0.1 + 0.2;  // not representable in short decimal form
  p[4] = std::numeric_limits<double>::denorm_min();
  net.SetFlatParameters(p);
  const Mlp back = Mlp::Load(net.Save());
  EXPECT_TRUE(back == net);
  EXPECT_EQ(back.FlatParameters(), net.FlatParameters());
  EXPECT_EQ(back.Save(), net.Save());
  EXPECT_EQ(back.seed(), 77u);
}

TEST(MlpTest, CorruptCheckpointsAreRejected) {
  const std::string good = Mlp::Init({3, 2, 1}, 1).Save();
  for (const std::string bad : {std::string("{"), std::string("[]"), good.substr(0, good.size() / 2),
                                std::string("{\"version\":1}")}) {
    try {
      Mlp::Load(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kCorruptData);
    }
  }
  auto j = nlohmann::json::parse(good);
  j["weights"][0].erase(0);
  EXPECT_THROW(Mlp::Load(j.dump()), Error);
}

TEST(MlpTest, SgdStepRefusesNonFiniteGradients) {
  Mlp net = Mlp::Init({3, 4, 1}, 2);
  const Mlp before = net;
  auto g = net.ZeroGradients();
  g.weights[1][2] = std::numeric_limits<double>::quiet_NaN();
  try {
    net.SgdStep(g, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
  EXPECT_TRUE(net == before);
  g.weights[1][2] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(net.SgdStep(g, 0.1), Error);
  EXPECT_TRUE(net == before);
}

TEST(MlpTest, SgdStepMovesAgainstTheGradient) {
  Mlp net = Golden221();
  const std::vector<double> x{1.0, 2.0};
  const std::vector<double> up{1.0};
  const double before = net.ForwardScalar(x);
  net.SgdStep(net.Backward(x, up), 0.01);
  EXPECT_LT(net.ForwardScalar(x), before);
}

TEST(MlpTest, ShapeErrors) {
  const Mlp net = Mlp::Init({3, 2}, 1);
  const std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(net.Forward(x), Error);
  EXPECT_THROW(Mlp::Init({3}, 1), Error);
  EXPECT_THROW(Mlp::Init({3, 0, 1}, 1), Error);
  Mlp other = Mlp::Init({3, 3}, 1);
  EXPECT_THROW(other.SgdStep(net.ZeroGradients(), 0.1), Error);
}

}  // namespace
}  // namespace rlrag::nn
