#include "npgd/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "npgd/rng.hpp"

namespace npgd {

std::size_t GeneratorModel::latent_dim() const {
  return is_circle() ? 1 : network().input_dim;
}

std::size_t GeneratorModel::ambient_dim() const {
  return is_circle() ? circle().ambient_dim : network().output_dim();
}

GeneratorModel make_circle_generator(std::size_t ambient_dim, std::size_t axis_a,
                                     std::size_t axis_b) {
  if (ambient_dim < 2) throw std::invalid_argument("circle generator needs ambient_dim >= 2");
  if (axis_a >= ambient_dim || axis_b >= ambient_dim || axis_a == axis_b)
    throw std::invalid_argument("circle generator: bad plane axes");
  GeneratorModel g;
  g.model = CircleSpec{ambient_dim, axis_a, axis_b};
  return g;
}

GeneratorModel make_network_generator(DenseNetwork net) {
  net.validate();
  if (net.input_dim >= net.output_dim())
    throw std::invalid_argument("generator requires latent_dim < ambient_dim");
  GeneratorModel g;
  g.model = std::move(net);
  return g;
}

GeneratorModel make_frozen_random_generator(std::size_t latent_dim, std::size_t ambient_dim,
                                            const std::vector<std::size_t>& hidden_dims,
                                            std::uint64_t seed, double scale) {
  std::vector<LayerSpec> specs;
  for (std::size_t h : hidden_dims) specs.push_back({h, Activation::tanh});
  specs.push_back({ambient_dim, Activation::tanh});
  return make_network_generator(make_network(latent_dim, specs, seed, scale));
}

Vec generate(const GeneratorModel& g, const Vec& z) {
  if (z.size() != g.latent_dim())
    throw std::invalid_argument("generate: expected latent of length " +
                                std::to_string(g.latent_dim()) + ", got " +
                                std::to_string(z.size()));
  if (g.is_circle()) {
    const CircleSpec& c = g.circle();
    Vec x(c.ambient_dim, 0.0);
    x[c.axis_a] = std::cos(z[0]);
    x[c.axis_b] = std::sin(z[0]);
    return x;
  }
  return forward(g.network(), z);
}

Vec generator_vjp(const GeneratorModel& g, const Vec& z, const Vec& upstream) {
  if (upstream.size() != g.ambient_dim())
    throw std::invalid_argument("generator_vjp: upstream length mismatch");
  if (g.is_circle()) {
    const CircleSpec& c = g.circle();
    // dG/dz = (-sin z) e_a + (cos z) e_b
    return {upstream[c.axis_a] * -std::sin(z[0]) + upstream[c.axis_b] * std::cos(z[0])};
  }
  return backward(g.network(), z, upstream).input_gradient;
}

std::string generator_fingerprint(const GeneratorModel& g) {
  const std::string text = generator_to_json(g);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::vector<Vec> sample_latents(const LatentSampler& sampler, std::size_t count) {
  if (count < 1) throw std::invalid_argument("sample_latents: count must be >= 1");
  Rng rng(sampler.seed);
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(rng.normal_vec(sampler.dim));
  return out;
}

namespace {

// Encoder mirroring the decoder: reversed hidden dims, hidden activations
// carried over, identity at the latent output.
DenseNetwork make_encoder(const DecoderArch& arch, std::size_t data_dim, std::uint64_t seed) {
  std::vector<LayerSpec> specs;
  for (std::size_t i = arch.layers.size(); i-- > 0;) {
    const std::size_t out = i == 0 ? arch.latent_dim : arch.layers[i - 1].out_dim;
    const Activation act = i == 0 ? Activation::identity : arch.layers[i - 1].activation;
    specs.push_back({out, act});
  }
  return make_network(data_dim, specs, seed);
}

}  // namespace

DecoderTrainResult train_decoder(const std::vector<Vec>& data, const DecoderArch& arch,
                                 std::size_t epochs, std::uint64_t seed,
                                 double learning_rate) {
  if (data.empty()) throw std::invalid_argument("train_decoder: empty data");
  const std::size_t n = data.front().size();
  for (const Vec& x : data)
    if (x.size() != n) throw std::invalid_argument("train_decoder: ragged data vectors");
  if (arch.layers.empty() || arch.layers.back().out_dim != n)
    throw std::invalid_argument("train_decoder: decoder output dim must equal data dim " +
                                std::to_string(n));

  DenseNetwork decoder = make_network(arch.latent_dim, arch.layers, derive_seed(seed, "decoder"));
  DenseNetwork encoder = make_encoder(arch, n, derive_seed(seed, "encoder"));
  AdamState dec_state = AdamState::for_network(decoder, learning_rate);
  AdamState enc_state = AdamState::for_network(encoder, learning_rate);

  DecoderTrainResult result;
  const std::size_t batch_size = std::min<std::size_t>(32, data.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(seed, "shuffle"));

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      GradientTape dec_tape = GradientTape::zeros_like(decoder);
      GradientTape enc_tape = GradientTape::zeros_like(encoder);
      double batch_loss = 0.0;
      for (std::size_t idx = start; idx < end; ++idx) {
        const Vec& x = data[order[idx]];
        const Vec code = forward(encoder, x);
        const Vec recon = forward(decoder, code);
        Vec residual = sub(recon, x);
        batch_loss += squared_norm(residual) / double(n);
        Vec upstream = scaled(residual, 2.0 / double(n));
        BackwardResult dec_back = backward(decoder, code, upstream);
        dec_tape.accumulate(dec_back.tape);
        enc_tape.accumulate(backward(encoder, x, dec_back.input_gradient).tape);
      }
      const double inv = 1.0 / double(end - start);
      dec_tape.scale(inv);
      enc_tape.scale(inv);
      adam_step(decoder, dec_tape, dec_state);
      adam_step(encoder, enc_tape, enc_state);
      epoch_loss += batch_loss;
      seen += end - start;
    }
    const double mse = epoch_loss / double(seen);
    if (std::isnan(mse))
      throw std::runtime_error("train_decoder: NaN loss at epoch " + std::to_string(epoch));
    result.epoch_mse.push_back(mse);
  }

  // Loss on the final parameters (epochs=0 reports the untrained model).
  double final_loss = 0.0;
  for (const Vec& x : data) {
    Vec recon = forward(decoder, forward(encoder, x));
    final_loss += squared_norm(sub(recon, x)) / double(n);
  }
  result.final_mse = final_loss / double(data.size());
  result.model = make_network_generator(std::move(decoder));
  return result;
}

std::string generator_to_json(const GeneratorModel& g) {
  nlohmann::json doc;
  doc["latent_dim"] = g.latent_dim();
  doc["ambient_dim"] = g.ambient_dim();
  if (g.is_circle()) {
    doc["kind"] = "analytic_circle";
    doc["plane_axes"] = {g.circle().axis_a, g.circle().axis_b};
  } else {
    doc["kind"] = "network";
    doc["network"] = nlohmann::json::parse(network_to_json(g.network()));
  }
  return doc.dump();
}

GeneratorModel generator_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "analytic_circle") {
    const auto axes = doc.at("plane_axes").get<std::vector<std::size_t>>();
    if (axes.size() != 2) throw std::invalid_argument("analytic_circle: plane_axes must have 2 entries");
    return make_circle_generator(doc.at("ambient_dim").get<std::size_t>(), axes[0], axes[1]);
  }
  if (kind == "network")
    return make_network_generator(network_from_json(doc.at("network").dump()));
  throw std::invalid_argument("unknown generator kind: " + kind);
}

void save_generator(const GeneratorModel& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << generator_to_json(g);
}

GeneratorModel load_generator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return generator_from_json(text);
}

}  // namespace npgd
