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

#ifndef RLRAG_TINYNN_HPP_
#define RLRAG_TINYNN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rlrag::nn {

// Fully connected layer, weights row-major [out][in].
struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

// Same shapes as the network that produced it.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  std::vector<double> Flatten() const;
  Gradients& operator+=(const Gradients& other);
  void Scale(double factor);
};

// Feedforward net: tanh on hidden layers, identity on the output layer.
class Mlp {
 public:
  Mlp() = default;

  // Glorot-uniform weights in [-s, s], s = sqrt(6 / (fan_in + fan_out));
  // zero biases.
  static Mlp Init(std::vector<std::size_t> layer_sizes, std::uint64_t seed);
  static Mlp Zeros(std::vector<std::size_t> layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  std::vector<double> Forward(std::span<const double> x) const;
  double ForwardScalar(std::span<const double> x) const;

  // Gradient of dot(Forward(x), upstream) with respect to every parameter.
  Gradients Backward(std::span<const double> x,
                     std::span<const double> upstream) const;

  // p <- p - lr * g. Refuses (and leaves the net untouched) when any
  // gradient entry is non-finite or the shapes disagree.
  void SgdStep(const Gradients& grads, double lr);

  Gradients ZeroGradients() const;

  std::size_t parameter_count() const;
  std::vector<double> FlatParameters() const;
  void SetFlatParameters(std::span<const double> params);

  // Versioned JSON checkpoint. Load(Save()) is bit-exact.
  std::string Save() const;
  static Mlp Load(std::string_view bytes);

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  static Mlp Allocate(std::vector<std::size_t> layer_sizes);
  void CheckInput(std::span<const double> x) const;

  std::vector<std::size_t> sizes_;
  std::vector<Layer> layers_;
  std::uint64_t seed_ = 0;
};

}  // namespace rlrag::nn

#endif  // RLRAG_TINYNN_HPP_
