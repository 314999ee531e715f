#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npgd/generator.hpp"
#include "npgd/operators.hpp"

namespace npgd {

/// Unit-normalized differences of generator outputs.
struct SecantBatch {
  std::vector<Vec> secants;  // unit vectors in R^n
  std::uint64_t seed = 0;
  std::string generator_fingerprint;

  std::size_t count() const { return secants.size(); }
  std::size_t dim() const { return secants.empty() ? 0 : secants.front().size(); }
};

/// Draws count unit secants s = (G(z1)-G(z2))/||G(z1)-G(z2)||, z1, z2 i.i.d.
/// standard normal. Degenerate pairs (difference below 1e-9) are resampled;
/// more than 1000 consecutive rejections means the generator is constant.
SecantBatch sample_secants(const GeneratorModel& g, std::size_t count, std::uint64_t seed);

/// Test-only style helper, also used by fixtures: wraps explicit secant
/// vectors (normalized here) into a batch.
SecantBatch secant_batch_from_vectors(std::vector<Vec> secants, std::uint64_t seed = 0);

/// Streaming second-moment accumulation: sum of s s^T over the batch,
/// O(n^2) space. Merged from fixed-size chunk partials in index order so the
/// result does not depend on the worker count.
Matrix secant_covariance(const SecantBatch& batch);

struct DesignResult {
  LinearOperator op;            // dense, orthonormal rows
  Vec spectrum;                 // eigenvalues of sum s s^T, descending
  std::size_t covariance_rank;  // eigenvalues above 1e-10 * M
  bool rank_deficient_warning;  // m exceeds that rank
};

/// Measurement design: rows are the m leading eigenvectors of the secant
/// second-moment matrix (the orthonormal-rows maximizer of the average
/// captured secant energy).
DesignResult design_matrix(const SecantBatch& batch, std::size_t m);
DesignResult design_matrix_from_covariance(const Matrix& covariance, std::size_t m,
                                           std::size_t sample_count);

struct Histogram {
  Vec edges;                       // 65 edges for 64 uniform bins
  std::vector<std::size_t> counts;
};

struct RecEstimate {
  double alpha = 0.0;  // lower restricted eigenvalue bound, ||As||^2 terms
  double beta = 0.0;   // upper bound
  double kappa = 0.0;  // beta / alpha (inf when alpha == 0)
  double quantile_level = 1.0;
  std::size_t sample_count = 0;
  Histogram histogram;  // of ||As|| values
  Vec norms;            // ||As|| per secant, batch order
};

/// Empirical restricted-eigenvalue estimate over a secant batch. alpha and
/// beta are symmetric nearest-rank quantiles leaving (1-quantile_level)/2
/// mass on each side; quantile_level = 1 gives the exact min/max.
RecEstimate estimate_rec(const LinearOperator& op, const SecantBatch& batch,
                         double quantile_level);

struct CertifyReport {
  bool pass = false;
  double kappa = 0.0;
  double contraction_factor = 0.0;  // kappa - 1
  double quantile_level = 1.0;
  std::size_t sample_count = 0;
};

/// Convergence precondition: kappa < 2.
CertifyReport certify(const RecEstimate& rec);

std::string rec_report_json(const RecEstimate& rec);
std::string rec_report_csv(const RecEstimate& rec);

}  // namespace npgd
