#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npgd/linalg.hpp"

namespace npgd {

/// Per-pixel keep map for inpainting.
struct MaskSpec {
  enum class Kind { centered_square, scattered };
  Kind kind = Kind::centered_square;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t square_size = 0;     // centered_square
  double keep_fraction = 1.0;      // scattered
  std::uint64_t seed = 0;          // scattered
  std::vector<std::uint8_t> keep;  // height*width, row-major, 1 = observed

  std::size_t kept_count() const;

  /// Masks out a centered square of side `size`; everything else is kept.
  static MaskSpec centered_square(std::size_t height, std::size_t width, std::size_t size);
  /// Keeps round(keep_fraction * pixels) pixels chosen by a seeded shuffle.
  static MaskSpec scattered(std::size_t height, std::size_t width, double keep_fraction,
                            std::uint64_t seed);
};

/// Linear measurement map with forward and adjoint application.
/// Gaussian operators are materialized dense at construction so apply and
/// adjoint are exact transposes of each other.
struct LinearOperator {
  enum class Kind { dense, gaussian, downsample, inpaint };
  Kind kind = Kind::dense;
  std::size_t m = 0;  // output dim
  std::size_t n = 0;  // input dim

  Matrix dense;  // dense and gaussian kinds

  // image geometry (downsample / inpaint); planar layout:
  // index = channel*height*width + row*width + col
  std::size_t height = 0, width = 0, channels = 1;
  std::size_t factor = 1;  // downsample
  MaskSpec mask;           // inpaint
  std::uint64_t seed = 0;  // gaussian
};

LinearOperator make_dense_operator(Matrix a);
/// Entries A_ij ~ N(0, 1/m), deterministic per seed.
LinearOperator make_gaussian_operator(std::uint64_t seed, std::size_t m, std::size_t n);
/// Spatial average over f x f blocks per channel; requires f | height, f | width.
LinearOperator make_downsample_operator(std::size_t height, std::size_t width,
                                        std::size_t channels, std::size_t factor);
LinearOperator make_inpaint_operator(std::size_t height, std::size_t width,
                                     std::size_t channels, MaskSpec mask);

Vec apply(const LinearOperator& op, const Vec& x);
Vec adjoint(const LinearOperator& op, const Vec& y);

/// y + v with v ~ N(0, sigma^2 I), deterministic per seed; sigma = 0 is the identity.
Vec add_noise(const Vec& y, double sigma, std::uint64_t seed);

std::string operator_to_json(const LinearOperator& op);
LinearOperator operator_from_json(const std::string& text);
void save_operator(const LinearOperator& op, const std::string& path);
LinearOperator load_operator(const std::string& path);

}  // namespace npgd
