#pragma once

#include <cstdint>
#include <random>

namespace aqsim {

/// Seeded generator whose output sequence does not depend on the standard
/// library's distribution implementations, so runs replay bit-identically.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return p > 0 && uniform() < p; }

  /// Standard normal via Box-Muller (one value per call).
  double normal();

  /// Independent child stream, e.g. one per simulated component.
  Rng fork() { return Rng(engine_() ^ 0x9E3779B97F4A7C15ULL); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aqsim
