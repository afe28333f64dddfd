#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ppmxmixt/covariates.hpp"
#include "ppmxmixt/params.hpp"
#include "ppmxmixt/rng.hpp"
#include "ppmxmixt/state.hpp"

namespace ppmxmixt {

// Laplace exponent of the normalized generalized gamma process; the sigma = 0
// branch is the Dirichlet-process limit
inline double ngg_psi(double u, const NggParams& prm) {
  if (prm.sigma == 0.0) return prm.kappa * std::log1p(u);
  return prm.kappa * std::expm1(prm.sigma * std::log1p(u)) / prm.sigma;
}

// log of the conditional cohesion c(u, nj) for a block of size nj >= 1
double log_cohesion(double u, int nj, const NggParams& prm);

// log c(u, nj + 1) - log c(u, nj); nj = 0 gives the opening-a-new-block case
// under the convention c(u, 0) = 1
double log_cohesion_ratio(double u, int nj, const NggParams& prm);

// log of the unnormalized full conditional of the auxiliary variable u given
// n items in k blocks: (n-1) log u + (sigma k - n) log(1+u) - psi(u)
double log_u_density_unnorm(double u, int n, int k, const NggParams& prm);

// log of integral_0^inf u^(n-1) (1+u)^(sigma k - n) e^(-psi(u)) du, evaluated
// by adaptive quadrature in v = log u after factoring out the mode
double log_u_integral(int n, int k, const NggParams& prm);

// log prior mass of a partition with the given block sizes (auxiliary
// variable integrated out); masses over all partitions of n sum to one
double eppf_log_mass(const std::vector<std::int32_t>& sizes,
                     const NggParams& prm);

struct UMove {
  double u;
  bool accepted;
};

// one Metropolis-Hastings move for u; the proposal is a Gaussian step on
// log u, so a single scale works across the heavy right tail the conditional
// grows for sigma > 0
UMove sample_u_mh(double u, int n, int k, const NggParams& prm,
                  double proposal_sd, Rng& rng);

// log acceptance ratio of the move above, including the log-scale Jacobian;
// exactly 0 when u_prop == u_cur
double u_mh_log_ratio(double u_cur, double u_prop, int n, int k,
                      const NggParams& prm);

// Robbins-Monro scale adaptation toward a target acceptance rate; callers
// stop feeding it after burn-in, freezing the scale
class ProposalAdapter {
 public:
  explicit ProposalAdapter(double sd0, double target = 0.44)
      : log_sd_(std::log(sd0)), target_(target) {}
  void observe(bool accepted) {
    ++t_;
    log_sd_ += ((accepted ? 1.0 : 0.0) - target_) / std::sqrt(double(t_));
  }
  double sd() const { return std::exp(log_sd_); }

 private:
  double log_sd_;
  double target_;
  long t_ = 0;
};

// every partition of {0..n-1} (restricted-growth enumeration, so allocs are
// canonical) with unnormalized mass; with a similarity configuration the mass
// includes the product of block similarities and `total` is the normalizer,
// at most one since every g is bounded by one
struct EppfTable {
  std::vector<std::vector<std::int32_t>> allocs;
  std::vector<double> mass;
  double total = 0.0;
};

EppfTable brute_force_eppf(int n, const NggParams& prm,
                           const MixedCovariateMatrix* X = nullptr,
                           const SimilarityConfig* sim = nullptr);

// marginal Gibbs sampler for (partition, u) under the prior: each sweep
// reassigns every item from cohesion-ratio x similarity-ratio weights, then
// moves u by Metropolis-Hastings
class PriorPartitionSampler {
 public:
  // X may be null when cfg.family == ONE
  PriorPartitionSampler(int n, const NggParams& prm,
                        const SimilarityConfig& cfg,
                        const MixedCovariateMatrix* X, std::uint64_t seed,
                        double u_proposal_sd = 1.0);

  // sweeps with proposal-scale adaptation
  void run_burnin(int sweeps);
  void sweep();

  const std::vector<std::int32_t>& alloc() const { return st_.alloc(); }
  int k() const { return st_.k(); }
  double u() const { return u_; }
  double proposal_sd() const { return adapt_.sd(); }

 private:
  void reassign(int i);

  PartitionState st_;
  NggParams prm_;
  int n_;
  Rng rng_;
  double u_ = 1.0;
  ProposalAdapter adapt_;
  bool adapting_ = false;
  std::vector<double> logw_;
};

// convenience one-shot draw: burn-in then a final sweep
Partition sample_prior_partition(int n, const NggParams& prm,
                                 const SimilarityConfig& cfg,
                                 const MixedCovariateMatrix* X,
                                 std::uint64_t seed, int sweeps = 50);

}  // namespace ppmxmixt
