#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace egoloc {

// Deterministic random source. Distributions are derived from the raw
// mt19937_64 word stream (whose output is fixed by the standard) instead of
// <random> distribution objects, so sequences are reproducible across
// standard library implementations. Seeds can be split into independent
// streams for per-scene / per-query draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive, rejection sampled to avoid bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range + 1) % range;
    std::uint64_t draw = next_u64();
    while (draw > limit) draw = next_u64();
    return lo + static_cast<std::int64_t>(draw % range);
  }

  // Box-Muller from open-interval uniforms; consumes two words per call.
  double normal(double mean = 0.0, double sigma = 1.0) {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    return mean + sigma * z;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // splitmix64 finalizer; used to derive decorrelated child seeds.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  static std::uint64_t split(std::uint64_t seed, std::uint64_t stream) {
    return mix(seed ^ mix(stream));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace egoloc
