#pragma once

#include <cstdint>
#include <random>

namespace qfals {

/// Seeded random stream.
///
/// Gaussian and uniform variates are derived from the raw 64-bit engine
/// output directly (not through <random> distributions, whose algorithms are
/// implementation defined), so a given seed produces the same numbers with
/// any standard library. Child streams for parallel workers come from
/// split(), which is a pure function of (seed, index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal (Box-Muller, second variate cached).
  double normal();

  /// Independent child stream number `index`.
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }

 private:
  static std::uint64_t mix(std::uint64_t x);

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qfals
