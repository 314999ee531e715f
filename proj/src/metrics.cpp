#include "npgd/metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace npgd {

double relative_error(const Vec& x_star, const Vec& x_hat) {
  if (x_star.size() != x_hat.size())
    throw std::invalid_argument("relative_error: length mismatch");
  const double denom = squared_norm(x_star);
  if (denom == 0.0) throw std::invalid_argument("relative_error: zero reference signal");
  return squared_norm(sub(x_star, x_hat)) / denom;
}

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::array<double, kWindow * kWindow> gaussian_window() {
  std::array<double, kWindow> g{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kWindow; ++i) {
    const double d = double(i) - double(kWindow - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  std::array<double, kWindow * kWindow> w{};
  for (std::size_t i = 0; i < kWindow; ++i)
    for (std::size_t j = 0; j < kWindow; ++j) w[i * kWindow + j] = g[i] * g[j];
  return w;
}

double ssim_term(double mu1, double mu2, double s1, double s2, double s12, double c1,
                 double c2) {
  return ((2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)) /
         ((mu1 * mu1 + mu2 * mu2 + c1) * (s1 + s2 + c2));
}

// SSIM of one channel plane.
double ssim_plane(const double* a, const double* b, std::size_t h, std::size_t w, double c1,
                  double c2, bool& fallback) {
  if (h < kWindow || w < kWindow) {
    fallback = true;
    const std::size_t count = h * w;
    double mu1 = 0.0, mu2 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      mu1 += a[i];
      mu2 += b[i];
    }
    mu1 /= double(count);
    mu2 /= double(count);
    double s1 = 0.0, s2 = 0.0, s12 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      s1 += (a[i] - mu1) * (a[i] - mu1);
      s2 += (b[i] - mu2) * (b[i] - mu2);
      s12 += (a[i] - mu1) * (b[i] - mu2);
    }
    s1 /= double(count);
    s2 /= double(count);
    s12 /= double(count);
    return ssim_term(mu1, mu2, s1, s2, s12, c1, c2);
  }

  static const auto window = gaussian_window();
  double total = 0.0;
  std::size_t positions = 0;
  for (std::size_t r = 0; r + kWindow <= h; ++r) {
    for (std::size_t c = 0; c + kWindow <= w; ++c) {
      double mu1 = 0.0, mu2 = 0.0, m11 = 0.0, m22 = 0.0, m12 = 0.0;
      for (std::size_t i = 0; i < kWindow; ++i) {
        const double* ra = a + (r + i) * w + c;
        const double* rb = b + (r + i) * w + c;
        const double* wr = window.data() + i * kWindow;
        for (std::size_t j = 0; j < kWindow; ++j) {
          const double wt = wr[j];
          mu1 += wt * ra[j];
          mu2 += wt * rb[j];
          m11 += wt * ra[j] * ra[j];
          m22 += wt * rb[j] * rb[j];
          m12 += wt * ra[j] * rb[j];
        }
      }
      const double s1 = m11 - mu1 * mu1;
      const double s2 = m22 - mu2 * mu2;
      const double s12 = m12 - mu1 * mu2;
      total += ssim_term(mu1, mu2, s1, s2, s12, c1, c2);
      ++positions;
    }
  }
  return total / double(positions);
}

}  // namespace

SsimResult ssim(const Vec& x_star, const Vec& x_hat, const SsimOptions& opts) {
  if (x_star.size() != x_hat.size()) throw std::invalid_argument("ssim: length mismatch");
  const std::size_t plane = opts.height * opts.width;
  if (plane == 0 || plane * opts.channels != x_star.size())
    throw std::invalid_argument("ssim: inputs do not reshape to " +
                                std::to_string(opts.height) + "x" +
                                std::to_string(opts.width) + "x" +
                                std::to_string(opts.channels));
  const double c1 = kK1 * opts.dynamic_range * kK1 * opts.dynamic_range;
  const double c2 = kK2 * opts.dynamic_range * kK2 * opts.dynamic_range;
  SsimResult result;
  double total = 0.0;
  for (std::size_t ch = 0; ch < opts.channels; ++ch) {
    bool fb = false;
    total += ssim_plane(x_star.data() + ch * plane, x_hat.data() + ch * plane, opts.height,
                        opts.width, c1, c2, fb);
    result.global_fallback = result.global_fallback || fb;
  }
  result.value = total / double(opts.channels);
  return result;
}

MetricReport evaluate_batch(const std::vector<Vec>& x_star, const std::vector<Vec>& x_hat,
                            const SsimOptions& opts) {
  if (x_star.size() != x_hat.size())
    throw std::invalid_argument("evaluate_batch: batch size mismatch");
  MetricReport report;
  for (std::size_t i = 0; i < x_star.size(); ++i) {
    report.per_image_relative_error.push_back(relative_error(x_star[i], x_hat[i]));
    report.per_image_ssim.push_back(ssim(x_star[i], x_hat[i], opts).value);
  }
  const double count = double(std::max<std::size_t>(1, x_star.size()));
  for (double v : report.per_image_relative_error) report.relative_error += v / count;
  for (double v : report.per_image_ssim) report.ssim += v / count;
  return report;
}

}  // namespace npgd
