#include "npgd/solver.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "npgd/format.hpp"
#include "npgd/rng.hpp"

namespace npgd {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double sigma_max_squared(const LinearOperator& op, std::size_t steps, double tol) {
  // Power iteration on A^T A with a fixed deterministic start.
  Rng rng(0x5eedULL);
  Vec v = rng.normal_vec(op.n);
  double lambda = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    Vec next = adjoint(op, apply(op, v));
    const double len = norm(next);
    if (len == 0.0) return 0.0;
    for (double& x : next) x /= len;
    const double estimate = squared_norm(apply(op, next));
    const bool converged = std::abs(estimate - lambda) <= tol * std::max(1.0, estimate);
    lambda = estimate;
    v = std::move(next);
    if (converged) break;
  }
  return lambda;
}

namespace {

double loss(const LinearOperator& op, const Vec& x, const Vec& y) {
  return squared_norm(sub(apply(op, x), y));
}

double resolve_step_size(const LinearOperator& op, const SolverConfig& cfg,
                         const RecEstimate* rec) {
  if (cfg.step_size > 0.0) return cfg.step_size;
  if (rec && rec->beta > 0.0) return 1.0 / rec->beta;
  const double smax = sigma_max_squared(op);
  if (smax <= 0.0) throw std::invalid_argument("npgd: operator has zero spectral norm");
  return 1.0 / smax;
}

void check_finite(const Vec& v, std::size_t iteration) {
  for (double x : v)
    if (!std::isfinite(x))
      throw std::runtime_error("npgd: non-finite iterate at iteration " +
                               std::to_string(iteration));
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

SolverTrace npgd_solve(const LinearOperator& op, const Vec& y, const Projector& p,
                       const SolverConfig& cfg, const RecEstimate* rec) {
  if (y.size() != op.m)
    throw std::invalid_argument("npgd: measurement length " + std::to_string(y.size()) +
                                " != operator m " + std::to_string(op.m));
  if (cfg.max_iters < 1) throw std::invalid_argument("npgd: max_iters must be >= 1");
  const double eta = resolve_step_size(op, cfg, rec);

  SolverTrace trace;
  trace.step_size = eta;
  trace.stop_tolerance = cfg.stop_tolerance;
  Vec x = adjoint(op, y);
  check_finite(x, 0);
  trace.x.push_back(x);
  trace.f.push_back(loss(op, x, y));

  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    const auto tick = Clock::now();
    Vec residual = sub(apply(op, x), y);
    Vec w = x;
    axpy(w, -eta, adjoint(op, residual));
    Vec next = p.project(w);
    check_finite(next, t + 1);
    const double f = loss(op, next, y);
    trace.wallclock_ms.push_back(ms_since(tick));
    trace.w.push_back(std::move(w));
    trace.x.push_back(next);
    trace.f.push_back(f);
    x = std::move(next);
    if (f < cfg.stop_tolerance) break;
  }
  return trace;
}

TheoremBound track_theorem_bound(const SolverTrace& trace, const RecEstimate& rec,
                                 double delta, double accuracy_constant, const Vec* x_star,
                                 const LinearOperator* op, double slack) {
  TheoremBound bound;
  bound.alpha = rec.alpha;
  bound.beta = rec.beta;
  bound.delta = delta;
  bound.accuracy_constant = accuracy_constant;
  const double kappa = rec.kappa;
  if (!(kappa < 2.0) || rec.alpha <= 0.0) {
    bound.applicable = false;
    return bound;
  }
  bound.applicable = true;

  const double decay = kappa - 1.0;
  const double floor_term = rec.beta * delta;
  bound.bound_series.resize(trace.f.size());
  bound.bound_series[0] = trace.f[0];
  for (std::size_t t = 0; t + 1 < trace.f.size(); ++t) {
    bound.bound_series[t + 1] = decay * bound.bound_series[t] + floor_term;
    if (trace.f[t + 1] > decay * trace.f[t] + floor_term + slack) {
      bound.per_step_violations.push_back(t);
      if (bound.first_violation < 0) bound.first_violation = static_cast<long long>(t);
    }
    if (trace.f[t + 1] > bound.bound_series[t + 1] + slack) bound.closed_form_ok = false;
  }

  const double two_ab = 2.0 * rec.alpha / rec.beta - 1.0;  // > 0 when kappa < 2
  bound.final_error_bound = (accuracy_constant + 1.0 / two_ab) * delta;
  bound.asymptotic_bound = delta / two_ab;
  if (delta > 0.0) {
    const double arg = trace.f[0] / (accuracy_constant * rec.alpha * delta);
    bound.predicted_steps = arg > 1.0 ? std::log(arg) / (2.0 - kappa) : 0.0;
  } else {
    bound.exact_convergence_predicted = true;
    const double tol = trace.stop_tolerance > 0.0 ? trace.stop_tolerance : 1e-12;
    const double arg = trace.f[0] / tol;
    bound.predicted_steps = arg > 1.0 ? std::log(arg) / (2.0 - kappa) : 0.0;
  }

  if (x_star && op) {
    auto check_pair = [&](const Vec& a, const Vec& b, std::size_t t) {
      Vec d = sub(a, b);
      const double dn = squared_norm(d);
      if (dn < 1e-24) return;
      const double ratio = squared_norm(apply(*op, d)) / dn;
      const double tol = 1e-9;
      if (ratio < rec.alpha * (1.0 - tol) - slack || ratio > rec.beta * (1.0 + tol) + slack)
        bound.trajectory_rec_violations.push_back(t);
    };
    for (std::size_t t = 0; t < trace.x.size(); ++t) check_pair(trace.x[t], *x_star, t);
    for (std::size_t t = 0; t + 1 < trace.x.size(); ++t) check_pair(trace.x[t + 1], trace.x[t], t);
    std::sort(bound.trajectory_rec_violations.begin(), bound.trajectory_rec_violations.end());
    bound.trajectory_rec_violations.erase(
        std::unique(bound.trajectory_rec_violations.begin(),
                    bound.trajectory_rec_violations.end()),
        bound.trajectory_rec_violations.end());
  }
  return bound;
}

SolverTrace csgm_baseline(const LinearOperator& op, const Vec& y, const GeneratorModel& g,
                          double lambda_z, std::size_t restarts, std::size_t steps,
                          std::uint64_t seed, double learning_rate) {
  if (restarts < 1) throw std::invalid_argument("csgm: restarts must be >= 1");
  const std::size_t k = g.latent_dim();

  SolverTrace best;
  double best_objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(substream_seed(seed, r));
    Vec z = rng.normal_vec(k);
    SolverTrace trace;
    const auto tick = Clock::now();
    Vec x = generate(g, z);
    trace.x.push_back(x);
    trace.f.push_back(loss(op, x, y));
    for (std::size_t t = 0; t < steps; ++t) {
      Vec residual = sub(apply(op, x), y);
      Vec dz = generator_vjp(g, z, scaled(adjoint(op, residual), 2.0));
      axpy(dz, 2.0 * lambda_z, z);
      axpy(z, -learning_rate, dz);
      x = generate(g, z);
      check_finite(x, t + 1);
      trace.x.push_back(x);
      trace.f.push_back(loss(op, x, y));
    }
    trace.wallclock_ms.assign(std::max<std::size_t>(1, steps), ms_since(tick) /
                              double(std::max<std::size_t>(1, steps)));
    const double objective = trace.f.back() + lambda_z * squared_norm(z);
    if (objective < best_objective) {
      best_objective = objective;
      best = std::move(trace);
    }
  }
  return best;
}

SolverTrace pgd_inner_baseline(const LinearOperator& op, const Vec& y,
                               const GeneratorModel& g, const SolverConfig& cfg,
                               std::size_t inner_steps, std::size_t inner_restarts) {
  if (y.size() != op.m)
    throw std::invalid_argument("pgd_inner: measurement length mismatch");
  const double eta = resolve_step_size(op, cfg, nullptr);

  SolverTrace trace;
  trace.step_size = eta;
  trace.stop_tolerance = cfg.stop_tolerance;
  Vec x = adjoint(op, y);
  check_finite(x, 0);
  trace.x.push_back(x);
  trace.f.push_back(loss(op, x, y));

  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    const auto tick = Clock::now();
    Vec residual = sub(apply(op, x), y);
    Vec w = x;
    axpy(w, -eta, adjoint(op, residual));
    OracleOptions inner;
    inner.use_grid = false;
    inner.random_restarts = inner_restarts;
    inner.steps = inner_steps;
    inner.seed = substream_seed(cfg.seed, t);
    Vec next = oracle_project(g, w, inner).x_hat;
    check_finite(next, t + 1);
    const double f = loss(op, next, y);
    trace.wallclock_ms.push_back(ms_since(tick));
    trace.w.push_back(std::move(w));
    trace.x.push_back(next);
    trace.f.push_back(f);
    x = std::move(next);
    if (f < cfg.stop_tolerance) break;
  }
  return trace;
}

std::string trace_to_csv(const SolverTrace& trace, const Vec* x_star,
                         const TheoremBound* bound) {
  std::ostringstream out;
  out << "# schema=1\n";
  out << "iter,f,rel_err,bound_b_t,wallclock_ms\n";
  const double star_norm = x_star ? squared_norm(*x_star) : 0.0;
  for (std::size_t t = 0; t < trace.f.size(); ++t) {
    out << t << ',' << format_double(trace.f[t]) << ',';
    if (x_star && star_norm > 0.0)
      out << format_double(squared_norm(sub(*x_star, trace.x[t])) / star_norm);
    out << ',';
    if (bound && bound->applicable && t < bound->bound_series.size())
      out << format_double(bound->bound_series[t]);
    out << ',';
    if (t > 0 && t - 1 < trace.wallclock_ms.size())
      out << format_double(trace.wallclock_ms[t - 1]);
    out << '\n';
  }
  return out.str();
}

std::string trace_to_json(const SolverTrace& trace, bool include_iterates, const Vec* x_star,
                          const TheoremBound* bound) {
  nlohmann::json doc;
  doc["f"] = trace.f;
  doc["step_size"] = trace.step_size;
  doc["iterations"] = trace.iterations();
  doc["wallclock_ms"] = trace.wallclock_ms;
  if (x_star) {
    Vec rel;
    const double star_norm = squared_norm(*x_star);
    for (const Vec& xt : trace.x) rel.push_back(squared_norm(sub(*x_star, xt)) / star_norm);
    doc["rel_err"] = rel;
  }
  if (bound && bound->applicable) {
    doc["bound_series"] = bound->bound_series;
    doc["per_step_violations"] = bound->per_step_violations;
  }
  if (include_iterates) {
    doc["x"] = trace.x;
    doc["w"] = trace.w;
  }
  return doc.dump();
}

}  // namespace npgd
