#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npgd/linalg.hpp"

namespace npgd {

enum class Activation { relu, tanh, identity };

Activation activation_from_string(const std::string& name);
std::string activation_to_string(Activation a);

struct Layer {
  Matrix weight;  // out_dim x in_dim
  Vec bias;       // out_dim
  Activation activation = Activation::identity;
};

/// Dense feed-forward network: y = act_L(W_L ... act_1(W_1 x + b_1) ... + b_L).
struct DenseNetwork {
  std::size_t input_dim = 0;
  std::vector<Layer> layers;

  std::size_t output_dim() const {
    return layers.empty() ? input_dim : layers.back().weight.rows;
  }
  void validate() const;  // shape chaining + finite parameters
};

struct LayerSpec {
  std::size_t out_dim;
  Activation activation;
};

/// Glorot-uniform initialization, deterministic per seed. `scale` multiplies
/// the init range (used to control how nonlinear a frozen tanh fixture is).
DenseNetwork make_network(std::size_t input_dim, const std::vector<LayerSpec>& layers,
                          std::uint64_t seed, double scale = 1.0);

/// Per-parameter gradient buffers mirroring a DenseNetwork.
struct GradientTape {
  struct LayerGrad {
    Matrix weight;
    Vec bias;
  };
  std::vector<LayerGrad> layers;

  static GradientTape zeros_like(const DenseNetwork& net);
  void zero();
  void accumulate(const GradientTape& other);  // element-wise +=
  void scale(double c);
};

struct BackwardResult {
  GradientTape tape;
  Vec input_gradient;
};

Vec forward(const DenseNetwork& net, const Vec& x);

/// Reverse-mode gradients of <upstream, forward(net, x)> w.r.t. all
/// parameters and the input.
BackwardResult backward(const DenseNetwork& net, const Vec& x, const Vec& upstream);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<GradientTape::LayerGrad> first_moment;
  std::vector<GradientTape::LayerGrad> second_moment;

  static AdamState for_network(const DenseNetwork& net, double learning_rate = 1e-3);
};

/// Standard Adam update with bias correction; increments state.step.
/// Throws on NaN gradients, naming the offending layer.
void adam_step(DenseNetwork& net, const GradientTape& tape, AdamState& state);

// JSON persistence; f64 values round-trip bit-exactly.
std::string network_to_json(const DenseNetwork& net);
DenseNetwork network_from_json(const std::string& text);
void save_network(const DenseNetwork& net, const std::string& path);
DenseNetwork load_network(const std::string& path);

}  // namespace npgd
