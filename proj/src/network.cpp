#include "npgd/network.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "npgd/rng.hpp"

namespace npgd {

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  throw std::logic_error("bad activation enum");
}

void DenseNetwork::validate() const {
  if (layers.empty()) throw std::invalid_argument("network has no layers");
  std::size_t dim = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (l.weight.cols != dim)
      throw std::invalid_argument("layer " + std::to_string(i) + " expects input " +
                                  std::to_string(l.weight.cols) + ", got " +
                                  std::to_string(dim));
    if (l.bias.size() != l.weight.rows)
      throw std::invalid_argument("layer " + std::to_string(i) + " bias length mismatch");
    if (!l.weight.all_finite())
      throw std::invalid_argument("layer " + std::to_string(i) + " has non-finite weights");
    for (double b : l.bias)
      if (!std::isfinite(b))
        throw std::invalid_argument("layer " + std::to_string(i) + " has non-finite bias");
    dim = l.weight.rows;
  }
}

DenseNetwork make_network(std::size_t input_dim, const std::vector<LayerSpec>& specs,
                          std::uint64_t seed, double scale) {
  DenseNetwork net;
  net.input_dim = input_dim;
  Rng rng(seed);
  std::size_t fan_in = input_dim;
  for (const LayerSpec& spec : specs) {
    Layer layer;
    layer.activation = spec.activation;
    layer.weight = Matrix(spec.out_dim, fan_in);
    const double bound = scale * std::sqrt(6.0 / double(fan_in + spec.out_dim));
    for (double& w : layer.weight.data) w = rng.uniform(-bound, bound);
    layer.bias.assign(spec.out_dim, 0.0);
    net.layers.push_back(std::move(layer));
    fan_in = spec.out_dim;
  }
  net.validate();
  return net;
}

GradientTape GradientTape::zeros_like(const DenseNetwork& net) {
  GradientTape tape;
  for (const Layer& l : net.layers)
    tape.layers.push_back({Matrix(l.weight.rows, l.weight.cols), Vec(l.bias.size(), 0.0)});
  return tape;
}

void GradientTape::zero() {
  for (auto& l : layers) {
    std::fill(l.weight.data.begin(), l.weight.data.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
}

void GradientTape::accumulate(const GradientTape& other) {
  if (other.layers.size() != layers.size())
    throw std::invalid_argument("tape accumulate: layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& dst = layers[i];
    const auto& src = other.layers[i];
    for (std::size_t k = 0; k < dst.weight.data.size(); ++k)
      dst.weight.data[k] += src.weight.data[k];
    for (std::size_t k = 0; k < dst.bias.size(); ++k) dst.bias[k] += src.bias[k];
  }
}

void GradientTape::scale(double c) {
  for (auto& l : layers) {
    for (double& v : l.weight.data) v *= c;
    for (double& v : l.bias) v *= c;
  }
}

namespace {

double apply_activation(Activation a, double v) {
  switch (a) {
    case Activation::relu: return v > 0.0 ? v : 0.0;
    case Activation::tanh: return std::tanh(v);
    case Activation::identity: return v;
  }
  return v;
}

// Derivative in terms of the activated output.
double activation_grad_from_output(Activation a, double out) {
  switch (a) {
    case Activation::relu: return out > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - out * out;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

}  // namespace

Vec forward(const DenseNetwork& net, const Vec& x) {
  if (x.size() != net.input_dim)
    throw std::invalid_argument("forward: expected input of length " +
                                std::to_string(net.input_dim) + ", got " +
                                std::to_string(x.size()));
  Vec h = x;
  for (const Layer& l : net.layers) {
    Vec z = matvec(l.weight, h);
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = apply_activation(l.activation, z[i] + l.bias[i]);
    h = std::move(z);
  }
  return h;
}

BackwardResult backward(const DenseNetwork& net, const Vec& x, const Vec& upstream) {
  if (x.size() != net.input_dim)
    throw std::invalid_argument("backward: expected input of length " +
                                std::to_string(net.input_dim) + ", got " +
                                std::to_string(x.size()));
  if (upstream.size() != net.output_dim())
    throw std::invalid_argument("backward: expected upstream of length " +
                                std::to_string(net.output_dim()) + ", got " +
                                std::to_string(upstream.size()));

  // Forward pass keeping each layer's activated output.
  std::vector<Vec> outputs;  // outputs[i] = activation of layer i; outputs[-1] ~ x
  outputs.reserve(net.layers.size());
  const Vec* h = &x;
  for (const Layer& l : net.layers) {
    Vec z = matvec(l.weight, *h);
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = apply_activation(l.activation, z[i] + l.bias[i]);
    outputs.push_back(std::move(z));
    h = &outputs.back();
  }

  BackwardResult result;
  result.tape = GradientTape::zeros_like(net);
  Vec grad = upstream;  // gradient w.r.t. the current layer's activated output
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const Layer& l = net.layers[li];
    const Vec& out = outputs[li];
    const Vec& in = li == 0 ? x : outputs[li - 1];
    Vec dz(out.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      dz[i] = grad[i] * activation_grad_from_output(l.activation, out[i]);

    auto& lg = result.tape.layers[li];
    for (std::size_t i = 0; i < l.weight.rows; ++i) {
      const double d = dz[i];
      double* wrow = lg.weight.data.data() + i * l.weight.cols;
      for (std::size_t j = 0; j < l.weight.cols; ++j) wrow[j] += d * in[j];
      lg.bias[i] += d;
    }
    grad = matvec_transpose(l.weight, dz);
  }
  result.input_gradient = std::move(grad);
  return result;
}

AdamState AdamState::for_network(const DenseNetwork& net, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const Layer& l : net.layers) {
    s.first_moment.push_back({Matrix(l.weight.rows, l.weight.cols), Vec(l.bias.size(), 0.0)});
    s.second_moment.push_back({Matrix(l.weight.rows, l.weight.cols), Vec(l.bias.size(), 0.0)});
  }
  return s;
}

void adam_step(DenseNetwork& net, const GradientTape& tape, AdamState& state) {
  if (tape.layers.size() != net.layers.size() ||
      state.first_moment.size() != net.layers.size())
    throw std::invalid_argument("adam_step: shape mismatch between net, tape, state");
  for (std::size_t li = 0; li < tape.layers.size(); ++li) {
    for (double g : tape.layers[li].weight.data)
      if (std::isnan(g))
        throw std::runtime_error("adam_step: NaN gradient in layer " + std::to_string(li));
    for (double g : tape.layers[li].bias)
      if (std::isnan(g))
        throw std::runtime_error("adam_step: NaN gradient in layer " + std::to_string(li));
  }

  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, double(state.step));
  const double corr2 = 1.0 - std::pow(b2, double(state.step));
  auto update = [&](double& param, double& m, double& v, double g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mhat = m / corr1;
    const double vhat = v / corr2;
    param -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  };
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    Layer& l = net.layers[li];
    auto& m = state.first_moment[li];
    auto& v = state.second_moment[li];
    const auto& g = tape.layers[li];
    for (std::size_t k = 0; k < l.weight.data.size(); ++k)
      update(l.weight.data[k], m.weight.data[k], v.weight.data[k], g.weight.data[k]);
    for (std::size_t k = 0; k < l.bias.size(); ++k)
      update(l.bias[k], m.bias[k], v.bias[k], g.bias[k]);
  }
}

std::string network_to_json(const DenseNetwork& net) {
  nlohmann::json doc;
  doc["input_dim"] = net.input_dim;
  doc["layers"] = nlohmann::json::array();
  for (const Layer& l : net.layers) {
    nlohmann::json jl;
    jl["activation"] = activation_to_string(l.activation);
    jl["rows"] = l.weight.rows;
    jl["cols"] = l.weight.cols;
    jl["weights"] = l.weight.data;
    jl["bias"] = l.bias;
    doc["layers"].push_back(std::move(jl));
  }
  return doc.dump();
}

DenseNetwork network_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  DenseNetwork net;
  net.input_dim = doc.at("input_dim").get<std::size_t>();
  for (const auto& jl : doc.at("layers")) {
    Layer l;
    l.activation = activation_from_string(jl.at("activation").get<std::string>());
    l.weight.rows = jl.at("rows").get<std::size_t>();
    l.weight.cols = jl.at("cols").get<std::size_t>();
    l.weight.data = jl.at("weights").get<std::vector<double>>();
    if (l.weight.data.size() != l.weight.rows * l.weight.cols)
      throw std::invalid_argument("network json: weights length != rows*cols");
    l.bias = jl.at("bias").get<std::vector<double>>();
    net.layers.push_back(std::move(l));
  }
  net.validate();
  return net;
}

void save_network(const DenseNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << network_to_json(net);
}

DenseNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return network_from_json(text);
}

}  // namespace npgd
