#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npgd/design.hpp"
#include "npgd/operators.hpp"
#include "npgd/projector.hpp"

namespace npgd {

struct SolverConfig {
  // 0 means auto: 1/beta when a certified REC estimate is supplied,
  // else 1/sigma_max(A)^2 from power iteration.
  double step_size = 0.0;
  std::size_t max_iters = 100;
  double stop_tolerance = 1e-12;
  std::uint64_t seed = 0;
};

struct SolverTrace {
  std::vector<Vec> x;   // x_0 .. x_L (x_0 = A^T y)
  std::vector<Vec> w;   // w_t computed from x_t, t = 0 .. L-1
  Vec f;                // f(x_t) = ||A x_t - y||^2, t = 0 .. L
  Vec wallclock_ms;     // per iteration
  double step_size = 0.0;

  const Vec& x_hat() const { return x.back(); }
  double f_final() const { return f.back(); }
  std::size_t iterations() const { return x.size() - 1; }
};

/// Largest squared singular value by power iteration (50 steps, tol 1e-10).
double sigma_max_squared(const LinearOperator& op, std::size_t steps = 50, double tol = 1e-10);

/// Network-based projected gradient descent:
///   x_0 = A^T y;  w_t = x_t - eta A^T(A x_t - y);  x_{t+1} = P(w_t)
/// until f drops below stop_tolerance or max_iters projections were taken.
SolverTrace npgd_solve(const LinearOperator& op, const Vec& y, const Projector& p,
                       const SolverConfig& cfg,
                       const RecEstimate* rec = nullptr);

struct TheoremBound {
  bool applicable = false;  // requires kappa < 2
  double alpha = 0.0, beta = 0.0, delta = 0.0;
  double accuracy_constant = 1.0;  // the free constant C
  Vec bound_series;                // b_0 = f(x_0), b_{t+1} = (kappa-1) b_t + beta*delta
  double predicted_steps = 0.0;    // (1/(2-kappa)) log(f(x_0)/(C alpha delta))
  bool exact_convergence_predicted = false;  // delta = 0 convention
  double final_error_bound = 0.0;            // (C + 1/(2 alpha/beta - 1)) delta
  double asymptotic_bound = 0.0;             // delta / (2 alpha/beta - 1)

  // Per-step recurrence f(x_{t+1}) <= (kappa-1) f(x_t) + beta*delta.
  std::vector<std::size_t> per_step_violations;
  long long first_violation = -1;
  bool closed_form_ok = true;  // n-step bound f(x_n) <= b_n at every n

  // REC failures on the secants the proof actually uses: (x_t, x*) pairs,
  // checked when the ground truth is available. Evidence that the sampled
  // constants understate this trajectory.
  std::vector<std::size_t> trajectory_rec_violations;

  bool per_step_ok() const { return per_step_violations.empty(); }
  bool clean() const { return per_step_ok() && trajectory_rec_violations.empty(); }
};

/// Checks a trace against the convergence theorem with measured constants.
/// Violations are reported, not thrown: they falsify (alpha, beta, delta)
/// on this trajectory.
TheoremBound track_theorem_bound(const SolverTrace& trace, const RecEstimate& rec,
                                 double delta, double accuracy_constant = 1.0,
                                 const Vec* x_star = nullptr,
                                 const LinearOperator* op = nullptr,
                                 double slack = 1e-12);

/// Latent-space baseline: gradient descent on ||A G(z) - y||^2 + lambda_z ||z||^2,
/// best of `restarts` random initializations. Returns the best run's trace in
/// ambient space (x_t = G(z_t)).
SolverTrace csgm_baseline(const LinearOperator& op, const Vec& y, const GeneratorModel& g,
                          double lambda_z, std::size_t restarts, std::size_t steps,
                          std::uint64_t seed, double learning_rate = 0.05);

/// Projected gradient descent with an iterative inner projection instead of
/// the learned network: same outer recursion, projection by gradient descent
/// on ||G(z) - w_t||^2 with `inner_steps` per outer step.
SolverTrace pgd_inner_baseline(const LinearOperator& op, const Vec& y, const GeneratorModel& g,
                               const SolverConfig& cfg, std::size_t inner_steps,
                               std::size_t inner_restarts = 1);

/// CSV trace export: iter, f, rel_err (when x* known), bound_b_t (when bound
/// known), wallclock_ms. JSON export optionally embeds the full iterates.
std::string trace_to_csv(const SolverTrace& trace, const Vec* x_star = nullptr,
                         const TheoremBound* bound = nullptr);
std::string trace_to_json(const SolverTrace& trace, bool include_iterates = false,
                          const Vec* x_star = nullptr, const TheoremBound* bound = nullptr);

}  // namespace npgd
