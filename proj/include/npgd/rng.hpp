#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "npgd/linalg.hpp"

namespace npgd {

// splitmix64 finalizer; stable across platforms.
std::uint64_t mix64(std::uint64_t x);

/// Stable child-seed derivation: FNV-1a over the tag folded into the master
/// seed, then mixed. Used so each randomized component draws from its own
/// independent stream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component_tag);

/// Per-index substream seed, e.g. one stream per secant pair or probe.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// Seeded generator with the distributions used throughout.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::uint64_t next_u64() { return engine_(); }

  Vec normal_vec(std::size_t dim) {
    Vec v(dim);
    for (double& x : v) x = normal();
    return v;
  }
  Vec uniform_vec(std::size_t dim, double lo, double hi) {
    Vec v(dim);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace npgd
