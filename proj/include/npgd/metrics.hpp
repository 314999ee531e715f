#pragma once

#include <cstddef>
#include <vector>

#include "npgd/linalg.hpp"

namespace npgd {

/// ||x* - x_hat||^2 / ||x*||^2. Hard error on zero x*.
double relative_error(const Vec& x_star, const Vec& x_hat);

struct SsimOptions {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  double dynamic_range = 2.0;  // data in [-1, 1]
};

struct SsimResult {
  double value = 0.0;
  // Set when the image is smaller than the 11x11 window and the computation
  // fell back to a single global window.
  bool global_fallback = false;
};

/// Structural similarity: 11x11 Gaussian window (sigma 1.5), K1=0.01,
/// K2=0.03, mean over valid window positions; channels averaged.
SsimResult ssim(const Vec& x_star, const Vec& x_hat, const SsimOptions& opts);

struct MetricReport {
  double relative_error = 0.0;
  double ssim = 0.0;
  std::vector<double> per_image_relative_error;
  std::vector<double> per_image_ssim;
};

/// Batch evaluation; reports means plus per-image breakdown.
MetricReport evaluate_batch(const std::vector<Vec>& x_star, const std::vector<Vec>& x_hat,
                            const SsimOptions& opts);

}  // namespace npgd
