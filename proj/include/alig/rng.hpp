#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "alig/types.hpp"

namespace alig {

// Deterministic random source.  std::mt19937_64 has a standard-pinned output
// sequence; the distribution transforms are hand-rolled because the standard
// library's distributions are implementation-defined, and trajectories must
// replay bit-for-bit everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1): 53 random bits.
  double uniform() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; no spare caching so copies stay in sync.
  double gaussian() {
    double u1 = std::ldexp(static_cast<double>((engine_() >> 11) + 1), -53);  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, n); unbiased via rejection.
  Index uniform_index(Index n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<Index>(x % bound);
  }

  template <class Scalar>
  Vector<Scalar> gaussian_vector(Index n) {
    Vector<Scalar> v(n);
    for (Index i = 0; i < n; ++i) v[i] = static_cast<Scalar>(gaussian());
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace alig
