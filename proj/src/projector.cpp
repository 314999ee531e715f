#include "npgd/projector.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "npgd/parallel.hpp"
#include "npgd/rng.hpp"

namespace npgd {

Vec ExactCircleProjector::project(const Vec& x) const {
  if (x.size() != circle.ambient_dim)
    throw std::invalid_argument("project: expected input of length " +
                                std::to_string(circle.ambient_dim) + ", got " +
                                std::to_string(x.size()));
  const double a = x[circle.axis_a];
  const double b = x[circle.axis_b];
  const double r = std::hypot(a, b);
  Vec out(x.size(), 0.0);
  if (r == 0.0) {
    out[circle.axis_a] = 1.0;  // every circle point is equidistant; pick angle 0
  } else {
    out[circle.axis_a] = a / r;
    out[circle.axis_b] = b / r;
  }
  return out;
}

ProjectorTrainResult train_pseudo_inverse(const GeneratorModel& g,
                                          const ProjectorTrainConfig& cfg) {
  if (cfg.lambda < 0.0 || cfg.noise_sigma < 0.0)
    throw std::invalid_argument("train_pseudo_inverse: lambda and noise_sigma must be >= 0");
  const std::size_t k = g.latent_dim();
  const std::size_t n = g.ambient_dim();

  std::vector<LayerSpec> specs;
  for (std::size_t h : cfg.hidden_dims) specs.push_back({h, Activation::tanh});
  specs.push_back({k, Activation::identity});
  DenseNetwork g_dagger = make_network(n, specs, derive_seed(cfg.seed, "g_dagger_init"));
  AdamState state = AdamState::for_network(g_dagger, cfg.learning_rate);

  Rng rng(derive_seed(cfg.seed, "g_dagger_batches"));
  ProjectorTrainResult result;
  const bool g_is_net = g.is_network();

  auto batch_pass = [&](bool train) -> double {
    GradientTape tape = GradientTape::zeros_like(g_dagger);
    double loss = 0.0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const Vec z = rng.normal_vec(k);
      const Vec gz = generate(g, z);
      Vec u = gz;
      if (cfg.noise_sigma > 0.0)
        for (double& v : u) v += cfg.noise_sigma * rng.normal();
      const Vec a = forward(g_dagger, u);
      const Vec r = generate(g, a);

      const Vec res_x = sub(r, gz);      // ambient reconstruction residual
      const Vec res_z = sub(a, z);       // latent residual
      loss += squared_norm(res_x) + cfg.lambda * squared_norm(res_z);
      if (!train) continue;

      // d/da of ||G(a) - gz||^2 through the frozen generator, plus the
      // latent regularizer term.
      Vec da = g_is_net ? backward(g.network(), a, scaled(res_x, 2.0)).input_gradient
                        : generator_vjp(g, a, scaled(res_x, 2.0));
      axpy(da, 2.0 * cfg.lambda, res_z);
      tape.accumulate(backward(g_dagger, u, da).tape);
    }
    loss /= double(cfg.batch_size);
    if (std::isnan(loss)) throw std::runtime_error("train_pseudo_inverse: NaN loss");
    if (train) {
      tape.scale(1.0 / double(cfg.batch_size));
      adam_step(g_dagger, tape, state);
    }
    return loss;
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < cfg.batches_per_epoch; ++b) epoch_loss += batch_pass(true);
    result.epoch_loss.push_back(epoch_loss / double(cfg.batches_per_epoch));
  }
  // Report the loss of the parameters actually returned (also covers epochs=0).
  result.final_loss = batch_pass(false);

  result.model.g = g;
  result.model.g_dagger = std::move(g_dagger);
  return result;
}

namespace {

// Gradient descent on ||x - G(z)||^2 from one start; returns the best z seen.
// Stops early once improvement stalls (tight enough that analytic fixtures
// reach gaps below 1e-10).
void descend(const GeneratorModel& g, const Vec& x, Vec z, std::size_t steps, double lr,
             OracleResult& best) {
  double prev = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    const Vec gz = generate(g, z);
    const Vec residual = sub(gz, x);
    const double gap = squared_norm(residual);
    if (gap < best.gap) {
      best.gap = gap;
      best.x_hat = gz;
      best.z_hat = z;
    }
    if (prev - gap < 1e-16 * (1.0 + gap)) {
      if (++stalled >= 8) return;
    } else {
      stalled = 0;
    }
    prev = gap;
    const Vec dz = generator_vjp(g, z, scaled(residual, 2.0));
    axpy(z, -lr, dz);
  }
  // Score the final iterate too.
  const Vec gz = generate(g, z);
  const double gap = squared_norm(sub(gz, x));
  if (gap < best.gap) {
    best.gap = gap;
    best.x_hat = gz;
    best.z_hat = z;
  }
}

}  // namespace

OracleResult oracle_project(const GeneratorModel& g, const Vec& x, const OracleOptions& opts) {
  const std::size_t k = g.latent_dim();
  if (opts.use_grid && k > 4)
    throw std::invalid_argument("oracle_project: lattice initialization requires k <= 4");

  OracleResult best;
  best.gap = std::numeric_limits<double>::infinity();
  best.x_hat.assign(g.ambient_dim(), 0.0);
  best.z_hat.assign(k, 0.0);

  if (opts.use_grid) {
    const std::size_t points = opts.grid_points_per_axis;
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= points;
    for (std::size_t idx = 0; idx < total; ++idx) {
      Vec z(k);
      std::size_t rem = idx;
      for (std::size_t d = 0; d < k; ++d) {
        const std::size_t cell = rem % points;
        rem /= points;
        z[d] = points == 1 ? 0.0
                           : -opts.grid_half_width +
                                 2.0 * opts.grid_half_width * double(cell) / double(points - 1);
      }
      descend(g, x, std::move(z), opts.steps, opts.learning_rate, best);
    }
  }
  Rng rng(opts.seed);
  for (std::size_t r = 0; r < opts.random_restarts; ++r)
    descend(g, x, rng.normal_vec(k), opts.steps, opts.learning_rate, best);
  return best;
}

DeltaEstimate estimate_delta(const Projector& p, const GeneratorModel& g,
                             const DeltaOptions& opts) {
  const std::size_t k = g.latent_dim();
  const std::size_t n = g.ambient_dim();
  const std::size_t total = opts.probe_count + opts.extra_probes.size();
  if (total == 0) throw std::invalid_argument("estimate_delta: no probes");

  // Probe layout is fixed up front so evaluation order cannot matter:
  // even slots are noisy on-manifold draws, odd slots uniform off-manifold,
  // extra probes appended.
  std::vector<Vec> probes(total);
  for (std::size_t j = 0; j < opts.probe_count; ++j) {
    Rng rng(substream_seed(opts.seed, j));
    if (j % 2 == 0) {
      Vec x = generate(g, rng.normal_vec(k));
      if (opts.noise_sigma > 0.0)
        for (double& v : x) v += opts.noise_sigma * rng.normal();
      probes[j] = std::move(x);
    } else {
      probes[j] = rng.uniform_vec(n, -opts.uniform_half_width, opts.uniform_half_width);
    }
  }
  for (std::size_t j = 0; j < opts.extra_probes.size(); ++j)
    probes[opts.probe_count + j] = opts.extra_probes[j];

  DeltaEstimate est;
  est.quantile_level = opts.quantile;
  est.sample_count = total;
  est.gaps.assign(total, 0.0);
  parallel_chunks(total, 8, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const Vec& x = probes[j];
      OracleOptions oracle = opts.oracle;
      oracle.seed = substream_seed(opts.seed ^ 0x9e3779b9ULL, j);
      const double projected_gap = squared_norm(sub(x, p.project(x)));
      const double oracle_gap = oracle_project(g, x, oracle).gap;
      est.gaps[j] = std::max(0.0, projected_gap - oracle_gap);
    }
  });

  Vec sorted = est.gaps;
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank quantile: smallest value with at least q*N mass below-or-at.
  const double q = std::clamp(opts.quantile, 0.0, 1.0);
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * double(total)));
  rank = std::clamp<std::size_t>(rank, 1, total);
  est.delta = sorted[rank - 1];
  return est;
}

IdempotenceReport idempotence_error(const Projector& p, const std::vector<Vec>& x_set) {
  IdempotenceReport report;
  for (std::size_t i = 0; i < x_set.size(); ++i) {
    const Vec& x = x_set[i];
    const double xn = squared_norm(x);
    if (xn == 0.0) {
      report.skipped.push_back(i);
      continue;
    }
    const Vec px = p.project(x);
    const Vec ppx = p.project(px);
    const double pxn = squared_norm(px);
    report.index.push_back(i);
    report.relative_error.push_back(squared_norm(sub(x, px)) / xn);
    report.idempotence_defect.push_back(pxn == 0.0 ? 0.0 : squared_norm(sub(px, ppx)) / pxn);
  }
  return report;
}

void save_projector(const ProjectorModel& model, const ProjectorTrainConfig& cfg,
                    const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_generator(model.g, (fs::path(dir) / "generator.json").string());
  save_network(model.g_dagger, (fs::path(dir) / "pseudo_inverse.json").string());
  nlohmann::json manifest;
  manifest["generator"] = "generator.json";
  manifest["pseudo_inverse"] = "pseudo_inverse.json";
  manifest["train_config"] = {
      {"lambda", cfg.lambda},
      {"noise_sigma", cfg.noise_sigma},
      {"batch_size", cfg.batch_size},
      {"epochs", cfg.epochs},
      {"batches_per_epoch", cfg.batches_per_epoch},
      {"learning_rate", cfg.learning_rate},
      {"hidden_dims", cfg.hidden_dims},
      {"seed", cfg.seed},
  };
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw std::runtime_error("cannot write projector manifest in " + dir);
  out << manifest.dump(2);
}

ProjectorModel load_projector(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open: " + manifest_path);
  nlohmann::json manifest;
  in >> manifest;
  const fs::path base = fs::path(manifest_path).parent_path();
  ProjectorModel model;
  model.g = load_generator((base / manifest.at("generator").get<std::string>()).string());
  model.g_dagger =
      load_network((base / manifest.at("pseudo_inverse").get<std::string>()).string());
  if (model.g_dagger.input_dim != model.g.ambient_dim() ||
      model.g_dagger.output_dim() != model.g.latent_dim())
    throw std::invalid_argument("projector manifest: pseudo-inverse shape mismatch");
  return model;
}

}  // namespace npgd
