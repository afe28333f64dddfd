#include "ppmxmixt/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppmxmixt/dists.hpp"
#include "ppmxmixt/errors.hpp"
#include "ppmxmixt/kernels.hpp"

namespace ppmxmixt {

NigPrior::NigPrior(const ConjPriorConfig& cfg) : cfg_(cfg) {
  validate(cfg_);
  const int p = static_cast<int>(cfg_.mu0.size());
  Eigen::LLT<Eigen::MatrixXd> llt(cfg_.B0);
  if (llt.info() != Eigen::Success)
    throw ValidationError("prior.B0 is not positive definite");
  b0_inv_ = llt.solve(Eigen::MatrixXd::Identity(p, p));
  b0_inv_mu0_ = b0_inv_ * cfg_.mu0;
  mu0_b0inv_mu0_ = cfg_.mu0.dot(b0_inv_mu0_);
  logdet_b0_ = 0.0;
  for (int d = 0; d < p; ++d)
    logdet_b0_ += 2.0 * std::log(llt.matrixL()(d, d));
  lgamma_a0_ = std::lgamma(cfg_.a0);
  a0_log_b0_ = cfg_.a0 * std::log(cfg_.b0);
}

NigPrior::Posterior NigPrior::posterior(const SufficientStats& s) const {
  Posterior post;
  Eigen::MatrixXd prec = b0_inv_ + s.xtx;
  post.prec_llt.compute(prec);
  if (post.prec_llt.info() != Eigen::Success)
    throw NumericalError("block precision lost positive definiteness");
  const Eigen::VectorXd rhs = b0_inv_mu0_ + s.xty;
  post.mu = post.prec_llt.solve(rhs);
  post.a = cfg_.a0 + 0.5 * s.n;
  post.b = cfg_.b0 + 0.5 * (s.yty + mu0_b0inv_mu0_ - rhs.dot(post.mu));
  post.logdet_bj = 0.0;
  for (int d = 0; d < p(); ++d)
    post.logdet_bj -= 2.0 * std::log(post.prec_llt.matrixL()(d, d));
  return post;
}

double NigPrior::log_marginal(const SufficientStats& s) const {
  if (s.n == 0) return 0.0;
  const Posterior post = posterior(s);
  if (!(post.b > 0.0))
    throw NumericalError("nonpositive posterior scale; stats are broken");
  return -0.5 * s.n * dists::log_2pi +
         0.5 * (post.logdet_bj - logdet_b0_) + a0_log_b0_ -
         post.a * std::log(post.b) + std::lgamma(post.a) - lgamma_a0_;
}

ConjClusterParams NigPrior::draw(const SufficientStats& s, Rng& rng) const {
  const Posterior post = posterior(s);
  ConjClusterParams out;
  out.sigma2 = rng.inv_gamma(post.a, post.b);
  Eigen::VectorXd z(p());
  for (int d = 0; d < p(); ++d) z[d] = rng.normal();
  out.beta = post.mu +
             std::sqrt(out.sigma2) * post.prec_llt.matrixU().solve(z);
  return out;
}

ConjugateSampler::ConjugateSampler(const RegressionDataset& data,
                                   const MixedCovariateMatrix* X_sim,
                                   const NggParams& ngg,
                                   const SimilarityConfig& cfg_sim,
                                   const ConjPriorConfig& prior,
                                   const SamplerConfig& cfg,
                                   std::uint64_t seed)
    : data_(data),
      st_(X_sim, cfg_sim, data.n()),
      ngg_(ngg),
      cfg_(cfg),
      prior_(prior),
      rng_(seed),
      adapt_(cfg.u_proposal_sd),
      scratch_(prior_.p()) {
  validate(ngg_);
  validate(cfg_sim);
  validate(cfg_);
  if (data_.p() != prior_.p())
    throw DimensionMismatch("design has " + std::to_string(data_.p()) +
                            " columns but the base measure expects " +
                            std::to_string(prior_.p()));
  xrows_.reserve(data_.n());
  for (int i = 0; i < data_.n(); ++i)
    xrows_.push_back(data_.design.row(i).transpose());
  log_pred_.assign(data_.n(), 0.0);
  init_partition();
}

void ConjugateSampler::init_partition() {
  const int n = data_.n();
  std::vector<std::int32_t> alloc(n);
  if (cfg_.init == InitKind::Singletons || !st_.tracks_geometry()) {
    for (int i = 0; i < n; ++i) alloc[i] = i;
  } else {
    alloc = kmeans_style_alloc(rng_);
  }
  st_.reset(alloc);
  rebuild_stats();
  refresh_params();
}

// crude covariate clustering for a warm start: Lloyd iterations on the
// whitened continuous block with the binary block appended at its distance
// weight; only the seed partition, never the inference, depends on it
std::vector<std::int32_t> ConjugateSampler::kmeans_style_alloc(Rng& rng) {
  const MixedCovariateMatrix& X = *st_.geometry_source();
  const int n = X.n;
  const int dim = X.mc + X.mb;
  const int kk = std::clamp(int(std::lround(std::sqrt(double(n)))), 2, n);
  const double wcs = X.mc > 0 ? std::sqrt(X.wc) : 0.0;
  const double wbs = X.mb > 0 ? std::sqrt(X.wb / X.mb) : 0.0;
  Eigen::MatrixXd f(dim, n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < X.mc; ++d) f(d, i) = wcs * X.zt(d, i);
    for (int d = 0; d < X.mb; ++d) f(X.mc + d, i) = wbs * X.bt(d, i);
  }
  std::vector<int> centers;
  centers.push_back(int(rng.uniform_int(n)));
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < kk) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c : centers)
        best = std::min(best, (f.col(i) - f.col(c)).squaredNorm());
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) break;
    double r = rng.uniform() * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      r -= d2[i];
      if (r <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(pick);
  }
  const int kc = static_cast<int>(centers.size());
  Eigen::MatrixXd mu(dim, kc);
  for (int c = 0; c < kc; ++c) mu.col(c) = f.col(centers[c]);
  std::vector<std::int32_t> alloc(n, 0);
  for (int it = 0; it < 25; ++it) {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = (f.col(i) - mu.col(0)).squaredNorm();
      for (int c = 1; c < kc; ++c) {
        const double d = (f.col(i) - mu.col(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      alloc[i] = best;
    }
    mu.setZero();
    Eigen::VectorXd cnt = Eigen::VectorXd::Zero(kc);
    for (int i = 0; i < n; ++i) {
      mu.col(alloc[i]) += f.col(i);
      cnt[alloc[i]] += 1.0;
    }
    for (int c = 0; c < kc; ++c)
      if (cnt[c] > 0.0) mu.col(c) /= cnt[c];
  }
  return alloc;
}

void ConjugateSampler::rebuild_stats() {
  stats_.assign(st_.k(), SufficientStats(prior_.p()));
  for (int i = 0; i < data_.n(); ++i)
    stats_[st_.label_of(i)].add(xrows_[i], data_.y[i]);
}

void ConjugateSampler::refresh_params() {
  params_.resize(st_.k());
  for (int j = 0; j < st_.k(); ++j) params_[j] = prior_.draw(stats_[j], rng_);
}

void ConjugateSampler::step_u() {
  UMove mv = sample_u_mh(u_, data_.n(), st_.k(), ngg_, adapt_.sd(), rng_);
  u_ = mv.u;
  if (adapting_) adapt_.observe(mv.accepted);
}

void ConjugateSampler::sync_detach(int i) {
  const int b = st_.label_of(i);
  stats_[b].remove(xrows_[i], data_.y[i]);
  st_.detach(i);
  if (st_.origin_dissolved()) {
    stats_.erase(stats_.begin() + b);
    params_.erase(params_.begin() + b);
  }
  st_.apply_last_perm(stats_);
  st_.apply_last_perm(params_);
}

void ConjugateSampler::sync_attach(int i, int choice) {
  if (choice == st_.k()) {
    stats_.emplace_back(prior_.p());
    params_.push_back(ConjClusterParams{prior_.config().mu0, 1.0});
  }
  stats_[choice].add(xrows_[i], data_.y[i]);
  st_.attach(i, choice);
  st_.apply_last_perm(stats_);
  st_.apply_last_perm(params_);
}

void ConjugateSampler::compute_log_weights(int i) {
  const int k = st_.k();
  logw_.resize(k + 1);
  logw_prior_.resize(k + 1);
  for (int j = 0; j < k; ++j) {
    scratch_ = stats_[j];
    scratch_.add(xrows_[i], data_.y[i]);
    const double marg =
        prior_.log_marginal(scratch_) - prior_.log_marginal(stats_[j]);
    const double pr = log_cohesion_ratio(u_, st_.size(j), ngg_) +
                      st_.log_sim_ratio(j, i);
    logw_prior_[j] = pr;
    logw_[j] = pr + marg;
  }
  scratch_ = SufficientStats(prior_.p());
  scratch_.add(xrows_[i], data_.y[i]);
  const double pr_new = log_cohesion_ratio(u_, 0, ngg_);
  logw_prior_[k] = pr_new;
  logw_[k] = pr_new + prior_.log_marginal(scratch_);
}

void ConjugateSampler::reassign(int i) {
  sync_detach(i);
  compute_log_weights(i);
  const int k = st_.k();
  log_pred_[i] = kern::logsumexp(logw_.data(), k + 1) -
                 kern::logsumexp(logw_prior_.data(), k + 1);
  sync_attach(i, sample_categorical_log(logw_.data(), k + 1, rng_));
}

void ConjugateSampler::reassign_all() {
  for (int i = 0; i < data_.n(); ++i) reassign(i);
}

void ConjugateSampler::reassign_all(const std::vector<int>& order) {
  for (int i : order) reassign(i);
}

std::vector<double> ConjugateSampler::peek_log_weights(int i) {
  const bool was_singleton = st_.size(st_.label_of(i)) == 1;
  const std::vector<ConjClusterParams> saved = params_;
  sync_detach(i);
  compute_log_weights(i);
  std::vector<double> out = logw_;
  sync_attach(i, was_singleton ? st_.k() : st_.origin());
  // re-attaching restores the canonical layout, so the snapshot lines up
  params_ = saved;
  return out;
}

void ConjugateSampler::sweep() {
  adapting_ = cfg_.adapt_u_proposal && sweeps_done_ < cfg_.n_burnin;
  step_u();
  reassign_all();
  refresh_params();
  ++sweeps_done_;
}

ConjTrace ConjugateSampler::run() {
  ConjTrace trace;
  trace.rows.reserve(cfg_.n_iter - cfg_.n_burnin);
  for (int it = 0; it < cfg_.n_iter; ++it) {
    sweep();
    if (it < cfg_.n_burnin) continue;
    ConjTraceRow row;
    row.alloc = st_.alloc();
    row.u = u_;
    row.params = params_;
    row.log_pred = log_pred_;
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

ConjTrace run_chain_conjugate(const RegressionDataset& data,
                              const MixedCovariateMatrix* X_sim,
                              const NggParams& ngg,
                              const SimilarityConfig& cfg_sim,
                              const ConjPriorConfig& prior,
                              const SamplerConfig& cfg, std::uint64_t seed) {
  ConjugateSampler s(data, X_sim, ngg, cfg_sim, prior, cfg, seed);
  return s.run();
}

}  // namespace ppmxmixt
