#pragma once

// Counter-based random streams for the Monte Carlo engine. Every trial owns
// an independent substream keyed by (seed, trial index), so results are
// identical no matter how trials are distributed across worker threads.

#include <cstdint>

#include <cmath>

namespace backcom {

namespace detail {

// splitmix64 output mixer: a bijective avalanche over 64 bits.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic per-trial generator built on the splitmix64 sequence. The
// state is keyed by a double application of the mixer so that substreams of
// neighbouring trial indices share no sequence positions in practice.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial) {
    const std::uint64_t key = detail::mix64(seed ^ 0x8f1bbcdc2f698b1dull);
    state_ = detail::mix64(key ^ (trial * 0x9e3779b97f4a7c15ull + 0x243f6a8885a308d3ull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]: 53 random bits shifted into the mantissa, offset so 0
  // is excluded (the Box-Muller log below needs a nonzero argument).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
  }

  // Standard normal via the Marsaglia polar method; pairs are generated
  // lazily and cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Exponential with unit mean.
  double next_exponential() { return -std::log(next_uniform()); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift rejection-free mapping; bias is O(n / 2^64), invisible
    // at the trial counts used here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace backcom
