#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace ballet {

/// SplitMix64 finalizer; used to derive independent seeds for sub-streams.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seed for stream `stream` of a master seed. Distinct (seed, stream) pairs
/// give unrelated generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;

/// Deterministic random source. All variates are generated from the raw
/// 64-bit engine output by code in this library, so a seed reproduces the
/// same stream regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::size_t uniform_index(std::size_t bound);

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Log of a Gamma(shape, 1) variate. Works for arbitrarily small shapes
  /// where the variate itself underflows.
  double log_gamma(double shape);
  double gamma(double shape);

  /// Dirichlet draw via normalized Gamma variates (normalized in log space).
  std::vector<double> dirichlet(std::span<const double> alpha);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace ballet
