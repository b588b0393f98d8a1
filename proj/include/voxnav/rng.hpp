#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

// Deterministic random streams. std::mt19937_64 has a standard-mandated
// sequence, but the standard *distributions* do not, so all draws here go
// through our own mappings. Every consumer seeds an independent stream via
// stream_seed(), keeping draw order local to one component.

namespace voxnav {

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_index(uint64_t n) { return engine_() % n; }

  int uniform_int(int lo, int hi_inclusive) {
    return lo + static_cast<int>(uniform_index(static_cast<uint64_t>(hi_inclusive - lo + 1)));
  }

  /// Box-Muller normal draw; one value per call (the pair's twin is discarded
  /// so the stream layout stays trivial to reason about).
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

/// FNV-1a over a label, mixed with a base seed. Lets each named tensor or
/// subsystem own an order-independent substream.
inline uint64_t stream_seed(uint64_t base, const std::string& label) {
  uint64_t h = 1469598103934665603ull ^ (base * 0x9e3779b97f4a7c15ull);
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

/// splitmix64-style stateless hash; used for procedural view features where
/// a value must depend only on its indices, never on evaluation order.
inline uint64_t mix_u64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Deterministic value in [-1, 1) from a tuple of indices.
inline float hash_unit(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  uint64_t h = mix_u64(a ^ mix_u64(b ^ mix_u64(c ^ mix_u64(d))));
  return static_cast<float>(static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0);
}

}  // namespace voxnav
