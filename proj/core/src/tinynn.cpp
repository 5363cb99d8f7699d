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

#include <fmt/format.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "rlrag/error.hpp"
#include "rlrag/rng.hpp"

namespace rlrag::nn {
namespace {

constexpr int kCheckpointVersion = 1;

bool AllFinite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

std::vector<double> Gradients::Flatten() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].begin(), weights[l].end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  return flat;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.weights.size() != weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient layer count differs");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].size() != other.weights[l].size() ||
        biases[l].size() != other.biases[l].size()) {
      throw Error(ErrorCode::kDimensionMismatch, "gradient shapes differ");
    }
    for (std::size_t i = 0; i < weights[l].size(); ++i) {
      weights[l][i] += other.weights[l][i];
    }
    for (std::size_t i = 0; i < biases[l].size(); ++i) {
      biases[l][i] += other.biases[l][i];
    }
  }
  return *this;
}

void Gradients::Scale(double factor) {
  for (auto& w : weights) {
    for (double& x : w) x *= factor;
  }
  for (auto& b : biases) {
    for (double& x : b) x *= factor;
  }
}

Mlp Mlp::Allocate(std::vector<std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "an mlp needs at least input and output sizes");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) {
      throw Error(ErrorCode::kInvalidArgument, "layer sizes must be positive");
    }
  }
  Mlp net;
  net.sizes_ = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    Layer layer;
    layer.in = net.sizes_[l];
    layer.out = net.sizes_[l + 1];
    layer.weights.assign(layer.in * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

Mlp Mlp::Init(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  Mlp net = Allocate(std::move(layer_sizes));
  net.seed_ = seed;
  Rng rng(seed);
  for (Layer& layer : net.layers_) {
    const double s =
        std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    for (double& w : layer.weights) w = rng.uniform(-s, s);
  }
  return net;
}

Mlp Mlp::Zeros(std::vector<std::size_t> layer_sizes) {
  return Allocate(std::move(layer_sizes));
}

void Mlp::CheckInput(std::span<const double> x) const {
  if (layers_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "network has no layers");
  }
  if (x.size() != sizes_.front()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("input size mismatch: expected {}, got {}",
                            sizes_.front(), x.size()));
  }
}

std::vector<double> Mlp::Forward(std::span<const double> x) const {
  CheckInput(x);
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    z.assign(layer.out, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double sum = layer.bias[o];
      const double* row = &layer.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) sum += row[i] * a[i];
      z[o] = l + 1 < layers_.size() ? std::tanh(sum) : sum;
    }
    a.swap(z);
  }
  return a;
}

double Mlp::ForwardScalar(std::span<const double> x) const {
  if (output_size() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("scalar forward on a net with {} outputs",
                            output_size()));
  }
  return Forward(x)[0];
}

Gradients Mlp::ZeroGradients() const {
  Gradients g;
  for (const Layer& layer : layers_) {
    g.weights.emplace_back(layer.weights.size(), 0.0);
    g.biases.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

Gradients Mlp::Backward(std::span<const double> x,
                        std::span<const double> upstream) const {
  CheckInput(x);
  if (upstream.size() != sizes_.back()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("upstream gradient size mismatch: expected {}, "
                            "got {}",
                            sizes_.back(), upstream.size()));
  }
  // activations[l] is the input to layer l; the last entry is the output.
  std::vector<std::vector<double>> activations;
  activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const auto& a = activations.back();
    std::vector<double> z(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double sum = layer.bias[o];
      const double* row = &layer.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) sum += row[i] * a[i];
      z[o] = l + 1 < layers_.size() ? std::tanh(sum) : sum;
    }
    activations.push_back(std::move(z));
  }

  Gradients g = ZeroGradients();
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    if (l + 1 < layers_.size()) {
      // tanh'(z) = 1 - tanh(z)^2, and activations[l + 1] = tanh(z).
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double t = activations[l + 1][o];
        delta[o] *= 1.0 - t * t;
      }
    }
    const auto& a = activations[l];
    std::vector<double> prev(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      g.biases[l][o] = delta[o];
      double* grow = &g.weights[l][o * layer.in];
      const double* wrow = &layer.weights[o * layer.in];
      for (std::size_t i = 0; i < layer.in; ++i) {
        grow[i] = delta[o] * a[i];
        prev[i] += wrow[i] * delta[o];
      }
    }
    delta.swap(prev);
  }
  return g;
}

void Mlp::SgdStep(const Gradients& grads, double lr) {
  if (grads.weights.size() != layers_.size() ||
      grads.biases.size() != layers_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "gradients do not match the network's layer count");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (grads.weights[l].size() != layers_[l].weights.size() ||
        grads.biases[l].size() != layers_[l].bias.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("gradient shape mismatch in layer {}", l));
    }
    if (!AllFinite(grads.weights[l]) || !AllFinite(grads.biases[l])) {
      throw Error(ErrorCode::kNonFinite,
                  fmt::format("non-finite gradient in layer {}; step refused",
                              l));
    }
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      layer.weights[i] -= lr * grads.weights[l][i];
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] -= lr * grads.biases[l][i];
    }
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

std::vector<double> Mlp::FlatParameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const Layer& layer : layers_) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void Mlp::SetFlatParameters(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("expected {} parameters, got {}", parameter_count(),
                            params.size()));
  }
  std::size_t k = 0;
  for (Layer& layer : layers_) {
    for (double& w : layer.weights) w = params[k++];
    for (double& b : layer.bias) b = params[k++];
  }
}

std::string Mlp::Save() const {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (const Layer& layer : layers_) {
    weights.push_back(layer.weights);
    biases.push_back(layer.bias);
  }
  nlohmann::json j = {{"version", kCheckpointVersion},
                      {"layer_sizes", sizes_},
                      {"weights", std::move(weights)},
                      {"biases", std::move(biases)},
                      {"seed", seed_}};
  return j.dump();
}

Mlp Mlp::Load(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kCorruptData,
                fmt::format("checkpoint is not valid JSON: {}", e.what()));
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw Error(ErrorCode::kCorruptData,
                  fmt::format("unsupported checkpoint version {}", version));
    }
    Mlp net = Allocate(j.at("layer_sizes").get<std::vector<std::size_t>>());
    net.seed_ = j.at("seed").get<std::uint64_t>();
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != net.layers_.size() ||
        biases.size() != net.layers_.size()) {
      throw Error(ErrorCode::kCorruptData,
                  "checkpoint layer count disagrees with layer_sizes");
    }
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
      auto w = weights[l].get<std::vector<double>>();
      auto b = biases[l].get<std::vector<double>>();
      if (w.size() != net.layers_[l].weights.size() ||
          b.size() != net.layers_[l].bias.size()) {
        throw Error(ErrorCode::kCorruptData,
                    fmt::format("checkpoint layer {} has the wrong shape", l));
      }
      if (!AllFinite(w) || !AllFinite(b)) {
        throw Error(ErrorCode::kCorruptData,
                    fmt::format("checkpoint layer {} is not finite", l));
      }
      net.layers_[l].weights = std::move(w);
      net.layers_[l].bias = std::move(b);
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptData,
                fmt::format("malformed checkpoint: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptData) throw;
    throw Error(ErrorCode::kCorruptData,
                fmt::format("malformed checkpoint: {}", e.what()));
  }
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.sizes_ != b.sizes_ || a.seed_ != b.seed_) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (a.layers_[l].weights != b.layers_[l].weights ||
        a.layers_[l].bias != b.layers_[l].bias) {
      return false;
    }
  }
  return true;
}

}  // namespace rlrag::nn
