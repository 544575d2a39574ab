#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace liefm {

/**
 * Deterministic random stream.
 *
 * Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
 * does its own uniform/normal conversion, so streams are reproducible across
 * standard library implementations. Independent sub-streams are derived from
 * a root seed and a text label.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  /// Stream for `label`, independent of the streams for other labels.
  static Rng stream(std::uint64_t seed, std::string_view label);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace liefm
