#pragma once

#include <cmath>
#include <cstdint>

namespace specdiff {

/// SplitMix64 finalizer. Good 64-bit avalanche; used both for key derivation
/// and as the per-stream generator.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from (seed, purpose, id, step).
/// Purpose separates ensemble init, transport/collision, scrambles, etc.
inline uint64_t stream_key(uint64_t seed, uint64_t purpose, uint64_t id, uint64_t step) {
  uint64_t k = mix64(seed ^ 0x243f6a8885a308d3ull);
  k = mix64(k ^ purpose);
  k = mix64(k ^ id);
  k = mix64(k ^ step);
  return k;
}

/// Counter-free splittable stream. Streams with distinct keys are
/// statistically independent; a stream's output depends only on its key and
/// draw index, never on global state, so results are reproducible under any
/// parallel partitioning of work.
class RngStream {
 public:
  explicit RngStream(uint64_t key) : state_(mix64(key ^ 0x452821e638d01377ull)) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0,1).
  double uniform() {
    for (;;) {
      double u = (next_u64() >> 11) * 0x1.0p-53;
      if (u > 0.0 && u < 1.0) return u;
    }
  }

  /// Uniform on (a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (pairs cached).
  double gaussian() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cache_ = r * std::sin(a);
    have_cache_ = true;
    return r * std::cos(a);
  }

  /// Exp(1).
  double exponential() { return -std::log(uniform()); }

 private:
  uint64_t state_;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

}  // namespace specdiff
