#pragma once

#include <cmath>
#include <cstdint>

namespace cspapi {

/// SplitMix64 generator. Chosen over <random> engines because the standard
/// distributions are implementation-defined; this keeps every seeded draw
/// reproducible across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, n), n >= 1, via rejection sampling.
  std::uint32_t next_below(std::uint32_t n) {
    const std::uint64_t span = 0x100000000ULL;  // 2^32
    const std::uint64_t limit = span - span % n;
    for (;;) {
      std::uint64_t x = next_u64() >> 32;
      if (x < limit) return static_cast<std::uint32_t>(x % n);
    }
  }

  /// Standard normal via Box-Muller; caches the second deviate.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = next_double();
    double mag = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * M_PI * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a master seed. Used to split one
/// experiment seed into per-stage and per-iteration streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng r(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
  return r.next_u64();
}

}  // namespace cspapi
