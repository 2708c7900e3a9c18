#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

namespace pda {

// Counter-based stream ("splitmix64/v1"): state advances by a fixed odd
// increment and every output is a bijective mix of the state, so draw k of a
// stream is a pure function of (seed, k). All arithmetic is uint64, which
// keeps runs reproducible bit for bit.

inline std::uint64_t splitmix_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives an independent child seed from a root seed and one or two tags.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t s = splitmix_mix(root ^ (0x9E3779B97F4A7C15ull * (a + 1)));
  return splitmix_mix(s ^ (0xD1B54A32D192ED03ull * (b + 1)));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return splitmix_mix(state_);
  }

  /// Uniform double in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t next_below(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Standard normal via Box-Muller; consumes exactly two draws per pair.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fisher-Yates permutation of {0, ..., n-1}.
inline std::vector<std::size_t> random_permutation(std::size_t n, RandomStream& rs) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rs.next_below(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace pda
