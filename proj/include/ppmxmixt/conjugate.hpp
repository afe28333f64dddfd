#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ppmxmixt/cohesion.hpp"
#include "ppmxmixt/dataset.hpp"
#include "ppmxmixt/params.hpp"
#include "ppmxmixt/rng.hpp"
#include "ppmxmixt/state.hpp"

namespace ppmxmixt {

// per-block regression sufficient statistics, maintained incrementally
struct SufficientStats {
  int n = 0;
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  double yty = 0.0;

  explicit SufficientStats(int p = 0)
      : xtx(Eigen::MatrixXd::Zero(p, p)), xty(Eigen::VectorXd::Zero(p)) {}

  void add(const Eigen::VectorXd& x, double y) {
    n += 1;
    xtx.noalias() += x * x.transpose();
    xty.noalias() += x * y;
    yty += y * y;
  }
  void remove(const Eigen::VectorXd& x, double y) {
    n -= 1;
    xtx.noalias() -= x * x.transpose();
    xty.noalias() -= x * y;
    yty -= y * y;
  }
};

// Gaussian regression kernel with normal-inverse-gamma base measure; caches
// the prior-side quantities every marginal evaluation needs
class NigPrior {
 public:
  explicit NigPrior(const ConjPriorConfig& cfg);

  int p() const { return static_cast<int>(cfg_.mu0.size()); }
  const ConjPriorConfig& config() const { return cfg_; }

  // log of the block marginal m(y*); 0 for an empty block
  double log_marginal(const SufficientStats& s) const;

  // one exact draw from the conditional given the block data (the base
  // measure itself when the stats are empty)
  ConjClusterParams draw(const SufficientStats& s, Rng& rng) const;

 private:
  struct Posterior {
    Eigen::LLT<Eigen::MatrixXd> prec_llt;  // of B_j^{-1}
    Eigen::VectorXd mu;
    double a, b;
    double logdet_bj;  // log |B_j|
  };
  Posterior posterior(const SufficientStats& s) const;

  ConjPriorConfig cfg_;
  Eigen::MatrixXd b0_inv_;
  Eigen::VectorXd b0_inv_mu0_;
  double mu0_b0inv_mu0_;
  double logdet_b0_;
  double lgamma_a0_;
  double a0_log_b0_;
};

struct ConjTraceRow {
  std::vector<std::int32_t> alloc;
  double u = 1.0;
  std::vector<ConjClusterParams> params;  // one entry per block
  std::vector<double> log_pred;           // per item, for CPO/LPML
};

struct ConjTrace {
  std::vector<ConjTraceRow> rows;
};

// Collapsed Gibbs sampler: cluster parameters are integrated out of the
// reassignment weights (marginal ratio x cohesion ratio x similarity ratio),
// the auxiliary u moves by Metropolis-Hastings, and parameter draws are taken
// per block once the partition settles so every stored row is
// self-consistent.
class ConjugateSampler {
 public:
  // X_sim may be null when cfg_sim.family == ONE
  ConjugateSampler(const RegressionDataset& data,
                   const MixedCovariateMatrix* X_sim, const NggParams& ngg,
                   const SimilarityConfig& cfg_sim,
                   const ConjPriorConfig& prior, const SamplerConfig& cfg,
                   std::uint64_t seed);

  // granular pieces, exposed so statistical tests can drive them directly
  void step_u();
  void reassign(int i);
  void reassign_all();
  void reassign_all(const std::vector<int>& order);
  void refresh_params();

  // step_u + reassign_all + refresh_params; adapts the u proposal while
  // within the configured burn-in
  void sweep();

  // init + n_iter sweeps, recording rows after burn-in
  ConjTrace run();

  // hypothetical reassignment log-weights for item i (existing blocks then
  // new block), leaving the state unchanged
  std::vector<double> peek_log_weights(int i);

  const std::vector<std::int32_t>& alloc() const { return st_.alloc(); }
  int k() const { return st_.k(); }
  double u() const { return u_; }
  double proposal_sd() const { return adapt_.sd(); }
  const std::vector<SufficientStats>& stats() const { return stats_; }
  const std::vector<ConjClusterParams>& params() const { return params_; }
  const std::vector<double>& last_log_pred() const { return log_pred_; }
  const NigPrior& prior() const { return prior_; }

  void init_partition();  // per config: singletons or a k-means style seed

  // recompute every block's statistics from the data; required after a
  // caller mutates the response vector in place (calibration checks do)
  void rebuild_stats();

 private:
  void sync_detach(int i);
  void sync_attach(int i, int choice);
  void compute_log_weights(int i);
  std::vector<std::int32_t> kmeans_style_alloc(Rng& rng);

  const RegressionDataset& data_;
  PartitionState st_;
  NggParams ngg_;
  SamplerConfig cfg_;
  NigPrior prior_;
  Rng rng_;

  double u_ = 1.0;
  ProposalAdapter adapt_;
  bool adapting_ = false;
  int sweeps_done_ = 0;

  std::vector<Eigen::VectorXd> xrows_;
  std::vector<SufficientStats> stats_;
  std::vector<ConjClusterParams> params_;
  std::vector<double> log_pred_;
  std::vector<double> logw_;
  std::vector<double> logw_prior_;
  SufficientStats scratch_;
};

ConjTrace run_chain_conjugate(const RegressionDataset& data,
                              const MixedCovariateMatrix* X_sim,
                              const NggParams& ngg,
                              const SimilarityConfig& cfg_sim,
                              const ConjPriorConfig& prior,
                              const SamplerConfig& cfg, std::uint64_t seed);

}  // namespace ppmxmixt
