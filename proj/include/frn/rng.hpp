#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace frn {

// Seed for every stochastic operation in the toolkit. Identical seed +
// identical inputs must give bit-identical outputs.
struct Seed {
  std::uint64_t value = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Derives an independent sub-seed, e.g. per image or per pipeline stage.
inline Seed derive_seed(Seed base, std::uint64_t tag) {
  std::uint64_t s = base.value ^ (tag * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL);
  return Seed{detail::splitmix64(s)};
}

inline Seed derive_seed(Seed base, std::uint64_t tag, std::uint64_t tag2) {
  return derive_seed(derive_seed(base, tag), tag2);
}

// Small deterministic generator (splitmix64 core). Not cryptographic.
class Rng {
 public:
  explicit Rng(Seed seed) : state_(seed.value) {
    // decorrelate trivially related seeds (0, 1, 2, ...)
    (void)detail::splitmix64(state_);
  }

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // standard normal, Box-Muller (one value per pair of uniforms)
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Laplace(0, scale), inverse CDF
  double laplace(double scale) {
    const double u = uniform() - 0.5;
    return -scale * std::copysign(std::log(1.0 - 2.0 * std::fabs(u)), u);
  }

  // Poisson via Knuth multiplication, chunked so exp() never underflows.
  long poisson(double lambda) {
    if (lambda < 0) throw std::invalid_argument("poisson: lambda must be >= 0");
    long n = 0;
    while (lambda > 500.0) {
      n += poisson_knuth(500.0);
      lambda -= 500.0;
    }
    return n + poisson_knuth(lambda);
  }

 private:
  long poisson_knuth(double lambda) {
    if (lambda <= 0) return 0;
    const double l = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    return k - 1;
  }

  std::uint64_t state_;
};

}  // namespace frn
