#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "ppmxmixt/dists.hpp"

namespace ppmxmixt {

// Deterministic RNG with hand-rolled variate transforms. All sampling in the
// library goes through this class, so a fixed seed pins every draw no matter
// which libstdc++ is linked (std::normal_distribution etc. are not portable
// across implementations and would break trace reproducibility).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_seed_(seed), eng_(seed) {}

  // strictly inside (0,1)
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller with cached spare
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mu, double sd) { return mu + sd * normal(); }

  // Marsaglia-Tsang; rate parameterization, mean shape/rate
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      return g * std::pow(uniform(), 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

  // density b^a/Gamma(a) x^{-a-1} exp(-b/x), mean b/(a-1)
  double inv_gamma(double shape, double scale) {
    return scale / gamma(shape, 1.0);
  }

  // X ~ N(mu, sd^2) conditioned on X >= lo.
  // Standardized bound below 5: single-uniform inverse CDF on the upper tail,
  // which keeps precision because the tail mass is fed to the quantile
  // function directly. Above 5: exponential rejection (Robert 1995), since
  // the tail mass underflows long before the bound is unreachable.
  double trunc_normal_lower(double mu, double sd, double lo) {
    const double a = (lo - mu) / sd;
    double z;
    if (a <= 5.0) {
      const double tail = dists::norm_sf(a);  // P(Z >= a)
      for (;;) {
        z = -dists::norm_quantile(uniform() * tail);
        if (z >= a) break;  // guards quantile round-off at the boundary
      }
    } else {
      const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
      for (;;) {
        z = a - std::log(uniform()) / lambda;
        const double rho = z - lambda;
        if (std::log(uniform()) <= -0.5 * rho * rho) break;
      }
    }
    return mu + sd * z;
  }

  // unbiased integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    std::uint64_t x, r;
    do {
      x = eng_();
      r = x % n;
    } while (x - r > UINT64_MAX - (n - 1));
    return r;
  }

  // independent stream derived from the base seed; used for chain workers
  Rng substream(std::uint64_t stream_id) const {
    std::uint64_t z = base_seed_ + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z = z ^ (z >> 31);
    return Rng(z);
  }

  std::uint64_t base_seed() const { return base_seed_; }

 private:
  std::uint64_t base_seed_;
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// draws an index proportional to exp(logw[j]), stably shifted by the maximum
inline int sample_categorical_log(const double* logw, int k, Rng& rng) {
  double mx = logw[0];
  for (int j = 1; j < k; ++j) mx = std::max(mx, logw[j]);
  double total = 0.0;
  for (int j = 0; j < k; ++j) total += std::exp(logw[j] - mx);
  double r = rng.uniform() * total;
  for (int j = 0; j < k; ++j) {
    r -= std::exp(logw[j] - mx);
    if (r <= 0.0) return j;
  }
  return k - 1;
}

}  // namespace ppmxmixt
