#pragma once

#include <cstdint>
#include <random>

#include "gsmlab/common.hpp"

namespace gsmlab {

// Seeded stream used everywhere randomness is needed. std::mt19937_64 output
// is fixed by the standard; the helpers below avoid the library-specific
// distributions so draws are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be nonzero.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool chance(double p) { return static_cast<double>(next() >> 11) * 0x1.0p-53 < p; }

  Block128 block128() {
    Block128 b{};
    for (int half = 0; half < 2; ++half) {
      std::uint64_t x = engine_();
      for (int i = 0; i < 8; ++i) b[half * 8 + i] = static_cast<std::uint8_t>(x >> (8 * i));
    }
    return b;
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent seed for a numbered sub-run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace gsmlab
