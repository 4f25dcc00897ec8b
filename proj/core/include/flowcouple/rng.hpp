#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace flowcouple {

/// Seeded 64-bit Mersenne Twister. Uniforms use the top 53 bits so the variate stream is
/// identical on every conforming standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential(rate) by inverse CDF.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

/// Stream seed of replication `rep` under `base`.
inline std::uint64_t replication_seed(std::uint64_t base, std::uint64_t rep) { return base ^ rep; }

}  // namespace flowcouple
