#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace qten {

/// Deterministic counter-based generator (splitmix64 output stream).
/// Same key -> same sequence, on any platform, independent of call sites
/// elsewhere. Cheap to fork: derive sub-keys with mix_seed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1], 53-bit resolution.
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; draws two uniforms per pair.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

namespace detail {
inline std::uint64_t splitmix_fin(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Order-sensitive key combiner for deriving independent sub-streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return detail::splitmix_fin(detail::splitmix_fin(a + 0x9E3779B97F4A7C15ull) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

/// Stable 64-bit key for a double (distinguishes +-inf, preserves all bits).
inline std::uint64_t double_key(double v) { return std::bit_cast<std::uint64_t>(v); }

}  // namespace qten
