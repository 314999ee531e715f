#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npgd/generator.hpp"

namespace npgd {

/// Anything the solver can project with.
class Projector {
 public:
  virtual ~Projector() = default;
  virtual Vec project(const Vec& x) const = 0;
  virtual std::string name() const = 0;
};

/// Learned projector P_G = G(G_dagger(.)). G stays frozen; only the
/// pseudo-inverse carries trained parameters.
struct ProjectorModel final : Projector {
  GeneratorModel g;
  DenseNetwork g_dagger;  // ambient_dim -> latent_dim

  Vec encode(const Vec& x) const { return forward(g_dagger, x); }
  Vec project(const Vec& x) const override { return generate(g, encode(x)); }
  std::string name() const override { return "learned"; }
};

/// Closed-form projector for the circle fixture: radial normalization inside
/// the circle's plane, zero elsewhere. Satisfies the approximate-projection
/// definition with zero error.
struct ExactCircleProjector final : Projector {
  CircleSpec circle;

  explicit ExactCircleProjector(CircleSpec c) : circle(c) {}
  Vec project(const Vec& x) const override;
  std::string name() const override { return "exact_circle"; }
};

struct ProjectorTrainConfig {
  double lambda = 0.1;       // latent regularization weight
  double noise_sigma = 1.0;  // std of the ambient perturbation
  std::size_t batch_size = 64;
  std::size_t epochs = 20;
  std::size_t batches_per_epoch = 50;
  double learning_rate = 1e-3;
  std::vector<std::size_t> hidden_dims = {64, 64};  // pseudo-inverse hidden layers
  std::uint64_t seed = 0;
};

struct ProjectorTrainResult {
  ProjectorModel model;
  double final_loss = 0.0;
  std::vector<double> epoch_loss;
};

/// Fits the pseudo-inverse by minimizing, over its parameters only,
///   E ||G(Gd(G(z)+nu)) - G(z)||^2 + lambda ||Gd(G(z)+nu) - z||^2
/// with z ~ N(0, I_k), nu ~ N(0, sigma^2 I_n) resampled per batch.
ProjectorTrainResult train_pseudo_inverse(const GeneratorModel& g,
                                          const ProjectorTrainConfig& cfg);

struct OracleOptions {
  bool use_grid = true;
  std::size_t grid_points_per_axis = 9;  // over [-2.5, 2.5]^k; requires k <= 4
  double grid_half_width = 2.5;
  std::size_t random_restarts = 16;
  std::size_t steps = 500;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

struct OracleResult {
  Vec x_hat;   // best point found in R(G)
  Vec z_hat;   // its latent
  double gap;  // ||x - x_hat||^2
};

/// Brute-force projection onto R(G): multi-start gradient descent on
/// ||x - G(z)||^2 (lattice + random starts). Best-effort ground truth,
/// deterministic per seed.
OracleResult oracle_project(const GeneratorModel& g, const Vec& x, const OracleOptions& opts);

struct DeltaEstimate {
  double delta = 0.0;
  std::size_t sample_count = 0;
  double quantile_level = 0.99;
  std::vector<double> gaps;  // per-probe, floored at 0, in probe order
};

struct DeltaOptions {
  std::size_t probe_count = 500;
  double quantile = 0.99;
  double noise_sigma = 1.0;        // on-manifold probes G(z) + nu
  double uniform_half_width = 1.5; // off-manifold probes, per-coordinate
  std::uint64_t seed = 0;
  OracleOptions oracle;
  // Extra probes, e.g. gradient-step points harvested from solver runs.
  std::vector<Vec> extra_probes;
};

/// Probes the projector against the brute-force oracle:
/// gap(x) = max(0, ||x - P(x)||^2 - min_z ||x - G(z)||^2); delta is the
/// requested quantile (nearest-rank) of the gap distribution.
DeltaEstimate estimate_delta(const Projector& p, const GeneratorModel& g,
                             const DeltaOptions& opts);

struct IdempotenceReport {
  // Entries align with the probed subset; `skipped` lists zero-norm inputs.
  std::vector<std::size_t> index;
  std::vector<double> relative_error;      // ||x - P(x)||^2 / ||x||^2
  std::vector<double> idempotence_defect;  // ||P(x) - P(P(x))||^2 / ||P(x)||^2
  std::vector<std::size_t> skipped;
};

IdempotenceReport idempotence_error(const Projector& p, const std::vector<Vec>& x_set);

/// Persistence: generator + pseudo-inverse JSON files plus a manifest naming
/// both and recording the training configuration.
void save_projector(const ProjectorModel& model, const ProjectorTrainConfig& cfg,
                    const std::string& dir);
ProjectorModel load_projector(const std::string& manifest_path);

}  // namespace npgd
