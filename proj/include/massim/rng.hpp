#pragma once

#include <cmath>
#include <cstdint>

namespace massim {

// Deterministic splitmix64-based generator. Distributions are implemented
// by hand so that streams are reproducible across compilers and platforms
// (std:: distributions are implementation-specified).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // Exponential with the given mean.
  double exponential(double mean) {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return -mean * std::log(u);
  }

  // Poisson count, Knuth's method (fine for the small rates used here).
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    double p = 1.0;
    int k = 0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  // Mix extra words into a derived seed, for independent substreams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    Rng r(seed ^ (a * 0xD6E8FEB86659FD93ULL) ^ (b * 0xCA5A826395121157ULL) ^
          (c * 0x9E3779B97F4A7C15ULL));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

}  // namespace massim
