#include "ppmxmixt/cohesion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ppmxmixt/dists.hpp"
#include "ppmxmixt/errors.hpp"
#include "ppmxmixt/kernels.hpp"
#include "ppmxmixt/quadrature.hpp"
#include "ppmxmixt/similarity.hpp"

namespace ppmxmixt {

double log_cohesion(double u, int nj, const NggParams& prm) {
  if (nj < 1) throw EmptySet("cohesion of an empty block");
  return std::log(prm.kappa) + std::lgamma(nj - prm.sigma) -
         std::lgamma(1.0 - prm.sigma) -
         (nj - prm.sigma) * std::log1p(u);
}

double log_cohesion_ratio(double u, int nj, const NggParams& prm) {
  // nj = 0 uses the empty-block convention c(u,0) = 1, so the new-block
  // weight is c(u,1) = kappa (1+u)^(sigma-1). Dropping the shared (1+u)^-1
  // would give the equivalent pair (nj - sigma) vs kappa (1+u)^sigma; only
  // this pairing reduces to the Chinese-restaurant weights at sigma = 0 and
  // keeps the reassignment conditional aligned with the eppf.
  if (nj == 0)
    return std::log(prm.kappa) + (prm.sigma - 1.0) * std::log1p(u);
  return std::log(nj - prm.sigma) - std::log1p(u);
}

double log_u_density_unnorm(double u, int n, int k, const NggParams& prm) {
  if (u <= 0.0) return -std::numeric_limits<double>::infinity();
  return (n - 1) * std::log(u) +
         (prm.sigma * k - n) * std::log1p(u) - ngg_psi(u, prm);
}

namespace {

// log-density kernel in v = log u and its derivative; strictly concave in v
inline double hv(double v, int n, int k, const NggParams& prm) {
  const double u = std::exp(v);
  return n * v + (prm.sigma * k - n) * std::log1p(u) - ngg_psi(u, prm);
}

inline double hv_prime(double v, int n, int k, const NggParams& prm) {
  const double u = std::exp(v);
  const double s = u / (1.0 + u);
  return n - (n - prm.sigma * k) * s -
         prm.kappa * std::exp((prm.sigma - 1.0) * std::log1p(u)) * u;
}

}  // namespace

double log_u_integral(int n, int k, const NggParams& prm) {
  // bracket the root of h'(v): positive far left, negative far right
  double lo = -40.0, hi = 1.0;
  while (hv_prime(hi, n, k, prm) > 0.0) {
    hi += 5.0;
    if (hi > 1e4)
      throw QuadratureFailure("auxiliary-variable integrand mode not found");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (hv_prime(mid, n, k, prm) > 0.0 ? lo : hi) = mid;
  }
  const double vstar = 0.5 * (lo + hi);
  const double hstar = hv(vstar, n, k, prm);

  const double drop = 60.0;
  double vlo = vstar;
  for (int it = 0; it < 5000 && hv(vlo, n, k, prm) > hstar - drop; ++it)
    vlo -= 1.0;
  double vhi = vstar;
  for (int it = 0; it < 5000 && hv(vhi, n, k, prm) > hstar - drop; ++it)
    vhi += 1.0;

  const double integral = quad::integrate(
      [&](double v) { return std::exp(hv(v, n, k, prm) - hstar); }, vlo, vhi,
      1e-12);
  return hstar + std::log(integral);
}

double eppf_log_mass(const std::vector<std::int32_t>& sizes,
                     const NggParams& prm) {
  if (sizes.empty()) throw EmptySet("partition with no blocks");
  int n = 0;
  double logc = 0.0;
  for (auto nj : sizes) {
    if (nj < 1) throw EmptyBlock("block size " + std::to_string(nj));
    n += nj;
    logc += std::log(prm.kappa) + std::lgamma(nj - prm.sigma) -
            std::lgamma(1.0 - prm.sigma);
  }
  return logc - std::lgamma(double(n)) +
         log_u_integral(n, static_cast<int>(sizes.size()), prm);
}

double u_mh_log_ratio(double u_cur, double u_prop, int n, int k,
                      const NggParams& prm) {
  return log_u_density_unnorm(u_prop, n, k, prm) -
         log_u_density_unnorm(u_cur, n, k, prm) + std::log(u_prop) -
         std::log(u_cur);
}

UMove sample_u_mh(double u, int n, int k, const NggParams& prm,
                  double proposal_sd, Rng& rng) {
  const double prop = u * std::exp(proposal_sd * rng.normal());
  const double logr = u_mh_log_ratio(u, prop, n, k, prm);
  if (std::log(rng.uniform()) < logr) return {prop, true};
  return {u, false};
}

EppfTable brute_force_eppf(int n, const NggParams& prm,
                           const MixedCovariateMatrix* X,
                           const SimilarityConfig* sim) {
  if (n < 1 || n > 8)
    throw ValidationError("exhaustive partition enumeration needs 1 <= n <= 8");
  EppfTable table;
  std::map<std::vector<std::int32_t>, double> mass_by_sizes;

  std::vector<std::int32_t> a(n, 0);
  const bool with_sim =
      X != nullptr && sim != nullptr && sim->family != SimilarityFamily::ONE;
  while (true) {
    Partition p = make_partition(a);
    std::vector<std::int32_t> sizes = block_sizes(p);
    std::vector<std::int32_t> key = sizes;
    std::sort(key.begin(), key.end());
    auto it = mass_by_sizes.find(key);
    double lm;
    if (it == mass_by_sizes.end()) {
      lm = eppf_log_mass(sizes, prm);
      mass_by_sizes.emplace(std::move(key), lm);
    } else {
      lm = it->second;
    }
    if (with_sim) {
      for (const auto& block : blocks_of(p)) {
        ClusterGeometry g = compactness(block, *X);
        lm += log_similarity(g.d_total, *sim);
      }
    }
    table.allocs.push_back(a);
    table.mass.push_back(std::exp(lm));
    table.total += table.mass.back();

    // next restricted-growth string
    int i = n - 1;
    for (; i > 0; --i) {
      std::int32_t cap = 0;
      for (int j = 0; j < i; ++j) cap = std::max(cap, a[j]);
      if (a[i] <= cap) break;
    }
    if (i == 0) break;
    a[i]++;
    for (int j = i + 1; j < n; ++j) a[j] = 0;
  }
  return table;
}

PriorPartitionSampler::PriorPartitionSampler(int n, const NggParams& prm,
                                             const SimilarityConfig& cfg,
                                             const MixedCovariateMatrix* X,
                                             std::uint64_t seed,
                                             double u_proposal_sd)
    : st_(X, cfg, n), prm_(prm), n_(n), rng_(seed), adapt_(u_proposal_sd) {
  validate(prm_);
  validate(cfg);
  std::vector<std::int32_t> singles(n);
  for (int i = 0; i < n; ++i) singles[i] = i;
  st_.reset(singles);
}

void PriorPartitionSampler::reassign(int i) {
  st_.detach(i);
  const int k = st_.k();
  logw_.resize(k + 1);
  for (int j = 0; j < k; ++j)
    logw_[j] = log_cohesion_ratio(u_, st_.size(j), prm_) +
               st_.log_sim_ratio(j, i);
  logw_[k] = log_cohesion_ratio(u_, 0, prm_);
  st_.attach(i, sample_categorical_log(logw_.data(), k + 1, rng_));
}

void PriorPartitionSampler::sweep() {
  for (int i = 0; i < n_; ++i) reassign(i);
  UMove mv = sample_u_mh(u_, n_, st_.k(), prm_, adapt_.sd(), rng_);
  u_ = mv.u;
  if (adapting_) adapt_.observe(mv.accepted);
}

void PriorPartitionSampler::run_burnin(int sweeps) {
  adapting_ = true;
  for (int s = 0; s < sweeps; ++s) sweep();
  adapting_ = false;
}

Partition sample_prior_partition(int n, const NggParams& prm,
                                 const SimilarityConfig& cfg,
                                 const MixedCovariateMatrix* X,
                                 std::uint64_t seed, int sweeps) {
  PriorPartitionSampler s(n, prm, cfg, X, seed);
  s.run_burnin(std::max(1, sweeps - 1));
  s.sweep();
  return make_partition(s.alloc());
}

}  // namespace ppmxmixt
