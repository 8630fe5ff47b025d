#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mlgcp {

// Seeded generator with portable uniform/normal/poisson draws. The standard
// distributions are implementation-defined, so the transforms live here and
// the sequence depends only on the mt19937_64 stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

  // Exact Poisson sampling: chop-down inversion for small means, recursive
  // halving via binomial thinning-free split for large means.
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    long total = 0;
    while (mean > 30.0) {
      // split: Poisson(m) = Poisson(m/2) + Poisson(m/2)
      const double half = mean / 2.0;
      total += poisson_small(half);
      mean -= half;
    }
    return total + poisson_small(mean);
  }

  std::uint64_t next_raw() { return engine_(); }

 private:
  long poisson_small(double mean) {
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Deterministic derivation of per-replicate seeds from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 step on (master ^ golden-ratio * index)
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mlgcp
