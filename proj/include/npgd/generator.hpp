#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "npgd/network.hpp"

namespace npgd {

/// Unit circle embedded in R^n: z in R^1 -> cos(z) e_a + sin(z) e_b.
/// Its exact projector and REC constants are closed-form, which grounds the
/// convergence tests with zero projection error.
struct CircleSpec {
  std::size_t ambient_dim = 2;
  std::size_t axis_a = 0;
  std::size_t axis_b = 1;
};

/// The signal prior: a map G from latent space R^k into R^n.
struct GeneratorModel {
  std::variant<DenseNetwork, CircleSpec> model;

  bool is_network() const { return std::holds_alternative<DenseNetwork>(model); }
  bool is_circle() const { return std::holds_alternative<CircleSpec>(model); }
  const DenseNetwork& network() const { return std::get<DenseNetwork>(model); }
  const CircleSpec& circle() const { return std::get<CircleSpec>(model); }

  std::size_t latent_dim() const;
  std::size_t ambient_dim() const;
};

GeneratorModel make_circle_generator(std::size_t ambient_dim, std::size_t axis_a = 0,
                                     std::size_t axis_b = 1);
GeneratorModel make_network_generator(DenseNetwork net);

/// Frozen random tanh network used as a ground-truth manifold fixture.
GeneratorModel make_frozen_random_generator(std::size_t latent_dim, std::size_t ambient_dim,
                                            const std::vector<std::size_t>& hidden_dims,
                                            std::uint64_t seed, double scale = 1.0);

Vec generate(const GeneratorModel& g, const Vec& z);

/// d<upstream, G(z)>/dz; needed by the latent-space baselines and the
/// brute-force projection oracle.
Vec generator_vjp(const GeneratorModel& g, const Vec& z, const Vec& upstream);

/// Stable content fingerprint (hex) used to tie secant batches to the
/// generator they were sampled from.
std::string generator_fingerprint(const GeneratorModel& g);

struct LatentSampler {
  std::uint64_t seed = 0;
  std::size_t dim = 1;
};

/// i.i.d. standard normal latents, reproducible per seed.
std::vector<Vec> sample_latents(const LatentSampler& sampler, std::size_t count);

struct DecoderArch {
  std::size_t latent_dim;
  std::vector<LayerSpec> layers;  // last out_dim must equal the data dimension
};

struct DecoderTrainResult {
  GeneratorModel model;
  double final_mse = 0.0;
  std::vector<double> epoch_mse;  // mean reconstruction MSE per epoch
};

/// Trains an autoencoder on `data` and returns the decoder as a generator
/// (the encoder is discarded). Deterministic per seed.
DecoderTrainResult train_decoder(const std::vector<Vec>& data, const DecoderArch& arch,
                                 std::size_t epochs, std::uint64_t seed,
                                 double learning_rate = 1e-3);

// Persistence: {"kind", "latent_dim", "ambient_dim", ...} header; network
// kinds embed the neural JSON document.
std::string generator_to_json(const GeneratorModel& g);
GeneratorModel generator_from_json(const std::string& text);
void save_generator(const GeneratorModel& g, const std::string& path);
GeneratorModel load_generator(const std::string& path);

}  // namespace npgd
