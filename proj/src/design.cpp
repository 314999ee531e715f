#include "npgd/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "npgd/parallel.hpp"
#include "npgd/rng.hpp"

namespace npgd {

SecantBatch sample_secants(const GeneratorModel& g, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_secants: count must be >= 1");
  const std::size_t k = g.latent_dim();

  SecantBatch batch;
  batch.seed = seed;
  batch.generator_fingerprint = generator_fingerprint(g);
  batch.secants.assign(count, Vec{});

  constexpr double kDegenerate = 1e-9;
  constexpr std::size_t kMaxRejects = 1000;
  parallel_chunks(count, 1024, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      Rng rng(substream_seed(seed, j));
      for (std::size_t attempt = 0;; ++attempt) {
        if (attempt >= kMaxRejects)
          throw std::runtime_error("sample_secants: " + std::to_string(kMaxRejects) +
                                   " consecutive degenerate pairs; generator looks constant");
        const Vec z1 = rng.normal_vec(k);
        const Vec z2 = rng.normal_vec(k);
        Vec diff = sub(generate(g, z1), generate(g, z2));
        const double len = norm(diff);
        if (len < kDegenerate) continue;
        for (double& v : diff) v /= len;
        batch.secants[j] = std::move(diff);
        break;
      }
    }
  });
  return batch;
}

SecantBatch secant_batch_from_vectors(std::vector<Vec> secants, std::uint64_t seed) {
  SecantBatch batch;
  batch.seed = seed;
  batch.generator_fingerprint = "explicit";
  for (Vec& s : secants) {
    const double len = norm(s);
    if (len < 1e-9) throw std::invalid_argument("secant_batch_from_vectors: degenerate vector");
    for (double& v : s) v /= len;
    batch.secants.push_back(std::move(s));
  }
  return batch;
}

Matrix secant_covariance(const SecantBatch& batch) {
  if (batch.count() == 0) throw std::invalid_argument("secant_covariance: empty batch");
  const std::size_t n = batch.dim();
  constexpr std::size_t kChunk = 4096;
  const std::size_t nchunks = (batch.count() + kChunk - 1) / kChunk;

  std::vector<Matrix> partials(nchunks);
  parallel_chunks(batch.count(), kChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Matrix acc(n, n);
    for (std::size_t j = begin; j < end; ++j) {
      const Vec& s = batch.secants[j];
      if (s.size() != n) throw std::invalid_argument("secant_covariance: ragged batch");
      for (std::size_t r = 0; r < n; ++r) {
        const double sr = s[r];
        double* row = acc.data.data() + r * n;
        for (std::size_t col = 0; col < n; ++col) row[col] += sr * s[col];
      }
    }
    partials[c] = std::move(acc);
  });

  Matrix total(n, n);
  for (const Matrix& p : partials)
    for (std::size_t i = 0; i < total.data.size(); ++i) total.data[i] += p.data[i];
  return total;
}

DesignResult design_matrix_from_covariance(const Matrix& covariance, std::size_t m,
                                           std::size_t sample_count) {
  const std::size_t n = covariance.rows;
  if (m < 1 || m > n)
    throw std::invalid_argument("design_matrix: m must be in [1, " + std::to_string(n) + "]");

  const EigenDecomposition eig = sym_eig(covariance);
  DesignResult result;
  result.spectrum = eig.eigenvalues;
  result.covariance_rank = 0;
  const double rank_tol = 1e-10 * double(std::max<std::size_t>(1, sample_count));
  for (double ev : eig.eigenvalues)
    if (ev > rank_tol) ++result.covariance_rank;
  result.rank_deficient_warning = m > result.covariance_rank;

  Matrix rows(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) rows(i, j) = eig.eigenvectors(j, i);
  result.op = make_dense_operator(std::move(rows));
  return result;
}

DesignResult design_matrix(const SecantBatch& batch, std::size_t m) {
  return design_matrix_from_covariance(secant_covariance(batch), m, batch.count());
}

RecEstimate estimate_rec(const LinearOperator& op, const SecantBatch& batch,
                         double quantile_level) {
  if (batch.count() == 0) throw std::invalid_argument("estimate_rec: empty batch");
  if (op.n != batch.dim())
    throw std::invalid_argument("estimate_rec: operator n=" + std::to_string(op.n) +
                                " vs secant dim " + std::to_string(batch.dim()));
  if (quantile_level <= 0.0 || quantile_level > 1.0)
    throw std::invalid_argument("estimate_rec: quantile_level must be in (0, 1]");

  RecEstimate rec;
  rec.quantile_level = quantile_level;
  rec.sample_count = batch.count();
  rec.norms.assign(batch.count(), 0.0);
  parallel_chunks(batch.count(), 4096, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j)
      rec.norms[j] = norm(apply(op, batch.secants[j]));
  });

  Vec sorted = rec.norms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t count = sorted.size();
  // Symmetric trim: drop floor((1-q)/2 * N) samples on each side; q = 1
  // keeps everything, so alpha/beta bracket the exact min/max.
  const std::size_t drop =
      static_cast<std::size_t>(std::floor((1.0 - quantile_level) / 2.0 * double(count)));
  const double lo = sorted[std::min(drop, count - 1)];
  const double hi = sorted[count - 1 - std::min(drop, count - 1)];
  rec.alpha = lo * lo;
  rec.beta = hi * hi;
  rec.kappa = rec.alpha > 0.0 ? rec.beta / rec.alpha
                              : std::numeric_limits<double>::infinity();

  constexpr std::size_t kBins = 64;
  const double min_norm = sorted.front();
  const double max_norm = sorted.back();
  const double span = max_norm > min_norm ? max_norm - min_norm : 1.0;
  rec.histogram.edges.resize(kBins + 1);
  for (std::size_t i = 0; i <= kBins; ++i)
    rec.histogram.edges[i] = min_norm + span * double(i) / double(kBins);
  rec.histogram.counts.assign(kBins, 0);
  for (double v : rec.norms) {
    std::size_t bin = static_cast<std::size_t>((v - min_norm) / span * double(kBins));
    if (bin >= kBins) bin = kBins - 1;
    rec.histogram.counts[bin]++;
  }
  return rec;
}

CertifyReport certify(const RecEstimate& rec) {
  CertifyReport report;
  report.kappa = rec.kappa;
  report.contraction_factor = rec.kappa - 1.0;
  report.quantile_level = rec.quantile_level;
  report.sample_count = rec.sample_count;
  report.pass = rec.kappa < 2.0;
  return report;
}

std::string rec_report_json(const RecEstimate& rec) {
  nlohmann::json doc;
  doc["alpha"] = rec.alpha;
  doc["beta"] = rec.beta;
  doc["kappa"] = rec.kappa;
  doc["quantile_level"] = rec.quantile_level;
  doc["M"] = rec.sample_count;
  doc["bins"] = {{"edges", rec.histogram.edges}, {"counts", rec.histogram.counts}};
  return doc.dump();
}

std::string rec_report_csv(const RecEstimate& rec) {
  std::ostringstream out;
  out << "alpha,beta,kappa,quantile_level,M\n";
  out << rec.alpha << ',' << rec.beta << ',' << rec.kappa << ',' << rec.quantile_level << ','
      << rec.sample_count << '\n';
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < rec.histogram.counts.size(); ++i)
    out << rec.histogram.edges[i] << ',' << rec.histogram.edges[i + 1] << ','
        << rec.histogram.counts[i] << '\n';
  return out.str();
}

}  // namespace npgd
