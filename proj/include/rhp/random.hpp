#pragma once

// Random streams.
//
// A RandomStream wraps std::mt19937_64, whose output sequence is fixed by the
// standard, and derives every variate from it with code in this header (no
// std::*_distribution), so draw sequences are bit-reproducible across
// standard libraries.
//
// Substreams: replicate i of a run with master seed S is driven by
// mt19937_64 seeded from std::seed_seq{lo32(S), hi32(S), lo32(i), hi32(i)}.
// std::seed_seq's mixing is specified by the standard, so the mapping
// (S, i) -> stream is stable and independent of scheduling.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <boost/math/special_functions/erf.hpp>

namespace rhp {

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) { reseed(seed); }

  /// Stream for replicate `index` of a run with master seed `master`.
  static RandomStream substream(std::uint64_t master, std::uint64_t index) {
    RandomStream s;
    s.seed(master, index);
    return s;
  }

  void reseed(std::uint64_t seed) { this->seed(seed, 0); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Standard normal by inversion of the CDF.
  double standard_normal() {
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform());
  }

  /// Poisson(mean) by sequential search of the CDF; intended for small means.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 30.0) return poisson_split(mean);
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform();
    std::uint64_t k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p <= 0.0) break;  // cdf has saturated below u by rounding
    }
    return k;
  }

  /// Gamma(shape, rate): Marsaglia–Tsang squeeze/rejection.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      return g * std::pow(uniform(), 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = standard_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

 private:
  void seed(std::uint64_t master, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
  }

  // Large means: sum of independent Poisson pieces, each small enough for search.
  std::uint64_t poisson_split(double mean) {
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson(30.0);
      mean -= 30.0;
    }
    return total + poisson(mean);
  }

  std::mt19937_64 engine_;
};

}  // namespace rhp
