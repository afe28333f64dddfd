#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ppmxmixt/cohesion.hpp"
#include "ppmxmixt/conjugate.hpp"
#include "ppmxmixt/dataset.hpp"
#include "ppmxmixt/dists.hpp"
#include "ppmxmixt/quadrature.hpp"
#include "ppmxmixt/similarity.hpp"
#include "support.hpp"

using namespace ppmxmixt;
using test::batch_mean_se;
using test::exact_block_count_pmf;
using test::for_each_partition;
using test::partition_key;
using test::random_covariates;

namespace {

double log_invgamma_pdf(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

double student_t_logpdf(double y, double nu, double loc, double scale2) {
  const double z2 = (y - loc) * (y - loc) / (nu * scale2);
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * dists::pi * scale2) -
         0.5 * (nu + 1.0) * std::log1p(z2);
}

// posterior blocks recomputed with dense inverses, independent of the
// library's Cholesky path
struct DensePosterior {
  Eigen::MatrixXd B;
  Eigen::VectorXd mu;
  double a = 0.0, b = 0.0;
};

DensePosterior dense_posterior(const std::vector<Eigen::VectorXd>& xs,
                               const std::vector<double>& ys,
                               const ConjPriorConfig& prior) {
  const Eigen::MatrixXd b0inv = prior.B0.inverse();
  Eigen::MatrixXd prec = b0inv;
  Eigen::VectorXd rhs = b0inv * prior.mu0;
  double yty = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    prec += xs[i] * xs[i].transpose();
    rhs += xs[i] * ys[i];
    yty += ys[i] * ys[i];
  }
  DensePosterior post;
  post.B = prec.inverse();
  post.mu = post.B * rhs;
  post.a = prior.a0 + 0.5 * static_cast<double>(xs.size());
  post.b = prior.b0 + 0.5 * (yty + prior.mu0.dot(b0inv * prior.mu0) -
                             post.mu.dot(prec * post.mu));
  return post;
}

// intercept-only dataset; the covariate block stays empty and similarity is
// never consulted
RegressionDataset intercept_only(Eigen::VectorXd y) {
  RegressionDataset d;
  d.design = Eigen::MatrixXd::Ones(y.size(), 1);
  d.y = std::move(y);
  return d;
}

double total_variation(const std::map<std::string, double>& exact,
                       const std::map<std::string, long>& counts,
                       long total) {
  double tv = 0.0;
  for (const auto& [key, p] : exact) {
    auto it = counts.find(key);
    const double ph = it == counts.end()
                          ? 0.0
                          : static_cast<double>(it->second) / total;
    tv += std::fabs(p - ph);
  }
  for (const auto& [key, c] : counts)
    if (exact.find(key) == exact.end())
      tv += static_cast<double>(c) / total;
  return 0.5 * tv;
}

}  // namespace

TEST_CASE("block marginal likelihood matches a two dimensional quadrature") {
  Rng rng(501);
  for (int rep = 0; rep < 50; ++rep) {
    const int nj = 1 + static_cast<int>(rng.uniform_int(4));
    ConjPriorConfig prior;
    prior.mu0 = Eigen::VectorXd::Constant(1, rng.normal());
    prior.B0 = Eigen::MatrixXd::Constant(1, 1, rng.uniform(0.3, 3.0));
    prior.a0 = rng.uniform(1.2, 4.0);
    prior.b0 = rng.uniform(0.4, 3.0);
    std::vector<double> xs(nj), ys(nj);
    for (int i = 0; i < nj; ++i) {
      xs[i] = 1.5 * rng.normal();
      ys[i] = 2.0 * rng.normal();
    }
    if (rep == 7) xs[0] = 0.0;                 // column can be degenerate
    if (rep == 13 && nj >= 2) xs[1] = xs[0];   // and ties are allowed

    NigPrior np(prior);
    SufficientStats s(1);
    std::vector<Eigen::VectorXd> xv;
    for (int i = 0; i < nj; ++i) {
      xv.push_back(Eigen::VectorXd::Constant(1, xs[i]));
      s.add(xv.back(), ys[i]);
    }
    const double lm = np.log_marginal(s);

    // centering substitutions keep the integrand mass near the origin
    const DensePosterior dp = dense_posterior(xv, ys, prior);
    const double beta_c = dp.mu[0];
    const double s_c = std::log(dp.b / dp.a);

    auto inner = [&](double slog) {
      const double sig2 = std::exp(slog);
      // past the underflow boundary the density is zero to double precision
      if (sig2 == 0.0 || !std::isfinite(sig2)) return 0.0;
      auto f = [&](double v) {
        const double beta = beta_c + v;
        double lp = log_invgamma_pdf(sig2, prior.a0, prior.b0) + slog +
                    dists::log_norm_pdf(beta, prior.mu0[0],
                                        std::sqrt(sig2 * prior.B0(0, 0))) -
                    lm;
        for (int i = 0; i < nj; ++i)
          lp += dists::log_norm_pdf(ys[i], xs[i] * beta, std::sqrt(sig2));
        return std::exp(lp);
      };
      return quad::integrate_real_line(f, 1e-10);
    };
    const double total = quad::integrate_real_line(
        [&](double v) { return inner(s_c + v); }, 1e-9);
    CHECK(std::fabs(total - 1.0) < 1e-6);
  }
}

TEST_CASE("multivariate marginal agrees with quadrature and the predictive chain rule") {
  SUBCASE("three dimensional quadrature at p = 2") {
    ConjPriorConfig prior;
    prior.mu0 = Eigen::VectorXd::Zero(2);
    prior.mu0 << 0.4, -0.2;
    prior.B0 = Eigen::MatrixXd::Zero(2, 2);
    prior.B0 << 1.5, 0.4, 0.4, 0.9;
    prior.a0 = 2.6;
    prior.b0 = 1.1;
    NigPrior np(prior);

    Rng rng(77);
    std::vector<Eigen::VectorXd> xv;
    std::vector<double> ys;
    SufficientStats s(2);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd x(2);
      x << rng.normal(), rng.normal();
      xv.push_back(x);
      ys.push_back(1.5 * rng.normal());
      s.add(x, ys.back());
    }
    const double lm = np.log_marginal(s);
    const DensePosterior dp = dense_posterior(xv, ys, prior);
    const double s_c = std::log(dp.b / dp.a);

    auto joint = [&](double slog, double b0v, double b1v) {
      const double sig2 = std::exp(slog);
      if (sig2 == 0.0 || !std::isfinite(sig2)) return 0.0;
      Eigen::VectorXd beta(2);
      beta << dp.mu[0] + b0v, dp.mu[1] + b1v;
      const Eigen::VectorXd d = beta - prior.mu0;
      double lp = log_invgamma_pdf(sig2, prior.a0, prior.b0) + slog - lm;
      lp += -std::log(2.0 * dists::pi * sig2) -
            0.5 * std::log(prior.B0.determinant()) -
            0.5 * d.dot(prior.B0.inverse() * d) / sig2;
      for (int i = 0; i < 3; ++i)
        lp += dists::log_norm_pdf(ys[i], xv[i].dot(beta), std::sqrt(sig2));
      return std::exp(lp);
    };
    const double total = quad::integrate_real_line(
        [&](double sv) {
          return quad::integrate_real_line(
              [&](double b0v) {
                return quad::integrate_real_line(
                    [&](double b1v) { return joint(s_c + sv, b0v, b1v); },
                    1e-9);
              },
              1e-8);
        },
        1e-7);
    CHECK(std::fabs(total - 1.0) < 1e-5);
  }

  SUBCASE("marginal increments equal the closed form predictive density") {
    ConjPriorConfig prior;
    prior.mu0 = Eigen::VectorXd::Zero(3);
    prior.mu0 << 0.2, -1.0, 0.5;
    prior.B0 = Eigen::MatrixXd::Identity(3, 3) * 2.0;
    prior.B0(0, 1) = prior.B0(1, 0) = 0.6;
    prior.a0 = 3.1;
    prior.b0 = 1.7;
    NigPrior np(prior);

    Rng rng(301);
    std::vector<Eigen::VectorXd> xv;
    std::vector<double> ys;
    for (int i = 0; i < 6; ++i) {
      Eigen::VectorXd x(3);
      x << 1.0, rng.normal(), rng.normal();
      xv.push_back(x);
      ys.push_back(2.0 * rng.normal());
    }

    SufficientStats s(3);
    double lm_prev = 0.0;
    std::vector<Eigen::VectorXd> seen_x;
    std::vector<double> seen_y;
    for (int r = 0; r < 6; ++r) {
      const DensePosterior dp = dense_posterior(seen_x, seen_y, prior);
      const double nu = 2.0 * dp.a;
      const double loc = xv[r].dot(dp.mu);
      const double scale2 =
          (dp.b / dp.a) * (1.0 + xv[r].dot(dp.B * xv[r]));
      s.add(xv[r], ys[r]);
      const double lm = np.log_marginal(s);
      CHECK(lm - lm_prev ==
            doctest::Approx(student_t_logpdf(ys[r], nu, loc, scale2))
                .epsilon(1e-10));
      lm_prev = lm;
      seen_x.push_back(xv[r]);
      seen_y.push_back(ys[r]);
    }
  }
}

TEST_CASE("conditional draws reproduce the posterior moments") {
  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Zero(2);
  prior.mu0 << 1.0, -0.5;
  prior.B0 = Eigen::MatrixXd::Zero(2, 2);
  prior.B0 << 2.0, 0.5, 0.5, 1.2;
  prior.a0 = 3.5;
  prior.b0 = 2.2;
  NigPrior np(prior);
  Rng data_rng(606);

  SUBCASE("populated block") {
    std::vector<Eigen::VectorXd> xv;
    std::vector<double> ys;
    SufficientStats s(2);
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd x(2);
      x << 1.0, data_rng.normal();
      xv.push_back(x);
      ys.push_back(0.7 + 1.3 * data_rng.normal());
      s.add(x, ys.back());
    }
    const DensePosterior dp = dense_posterior(xv, ys, prior);
    REQUIRE(dp.a > 2.0);  // draw variance must exist for the error bars

    const int N = 120000;
    Rng rng(4242);
    Eigen::Vector2d mean_beta = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov_beta = Eigen::Matrix2d::Zero();
    double mean_s2 = 0.0, mean_prec = 0.0, ss_s2 = 0.0;
    std::vector<double> s2_draws;
    s2_draws.reserve(N);
    for (int t = 0; t < N; ++t) {
      const ConjClusterParams par = np.draw(s, rng);
      mean_beta += par.beta;
      cov_beta += (par.beta - dp.mu) * (par.beta - dp.mu).transpose();
      mean_s2 += par.sigma2;
      mean_prec += 1.0 / par.sigma2;
      s2_draws.push_back(par.sigma2);
    }
    mean_beta /= N;
    cov_beta /= N;
    mean_s2 /= N;
    mean_prec /= N;
    for (double v : s2_draws) ss_s2 += (v - mean_s2) * (v - mean_s2);

    const double es2 = dp.b / (dp.a - 1.0);
    const Eigen::Matrix2d cov_exact = es2 * dp.B;
    for (int d = 0; d < 2; ++d) {
      const double se = std::sqrt(cov_exact(d, d) / N);
      CHECK(std::fabs(mean_beta[d] - dp.mu[d]) < 4.0 * se);
    }
    const double se_s2 = std::sqrt(ss_s2 / (N - 1.0) / N);
    CHECK(std::fabs(mean_s2 - es2) < 4.0 * se_s2);
    // 1/sigma2 is gamma with shape a and rate b
    const double se_prec = std::sqrt(dp.a / (dp.b * dp.b) / N);
    CHECK(std::fabs(mean_prec - dp.a / dp.b) < 4.0 * se_prec);
    CHECK((cov_beta - cov_exact).norm() < 0.05 * cov_exact.norm());
  }

  SUBCASE("empty block draws from the base measure") {
    SufficientStats s(2);
    const int N = 100000;
    Rng rng(808);
    Eigen::Vector2d mean_beta = Eigen::Vector2d::Zero();
    double mean_s2 = 0.0;
    for (int t = 0; t < N; ++t) {
      const ConjClusterParams par = np.draw(s, rng);
      mean_beta += par.beta;
      mean_s2 += par.sigma2;
    }
    mean_beta /= N;
    mean_s2 /= N;
    const double es2 = prior.b0 / (prior.a0 - 1.0);
    for (int d = 0; d < 2; ++d) {
      const double se = std::sqrt(es2 * prior.B0(d, d) / N);
      CHECK(std::fabs(mean_beta[d] - prior.mu0[d]) < 4.0 * se);
    }
    const double sd_s2 =
        es2 / std::sqrt(prior.a0 - 2.0);  // finite because a0 > 2
    CHECK(std::fabs(mean_s2 - es2) < 4.0 * sd_s2 / std::sqrt(double(N)));
  }
}

TEST_CASE("a flat base measure pins the intercept posterior on the sample mean") {
  Rng rng(99);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) y[i] = 5.0 + rng.normal();
  const double ybar = y.mean();

  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Constant(1, 77.0);  // far off on purpose
  prior.B0 = Eigen::MatrixXd::Constant(1, 1, 1e8);
  prior.a0 = 2.0;
  prior.b0 = 1.0;
  NigPrior np(prior);

  SufficientStats s(1);
  for (int i = 0; i < 30; ++i)
    s.add(Eigen::VectorXd::Ones(1), y[i]);

  const int N = 20000;
  double mean_beta = 0.0;
  for (int t = 0; t < N; ++t) mean_beta += np.draw(s, rng).beta[0];
  mean_beta /= N;
  CHECK(std::fabs(mean_beta - ybar) < 5e-3);
}

TEST_CASE("item reassignment targets the exact conditional partition law") {
  // five items, auxiliary variable frozen at its initial value, similarity
  // off; the invariant law of the scan is enumerable
  MixedCovariateMatrix X = random_covariates(5, 1, 0, 1105);
  Eigen::VectorXd y(5);
  y << -1.5, -0.7, 0.0, 0.8, 1.6;
  RegressionDataset data = make_regression_dataset(y, std::move(X));

  const NggParams prm{1.2, 0.4};
  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Zero(2);
  prior.B0 = Eigen::MatrixXd::Identity(2, 2) * 4.0;
  prior.a0 = 3.0;
  prior.b0 = 2.0;
  SimilarityConfig sim;  // ONE
  SamplerConfig cfg;
  cfg.n_iter = 1;
  cfg.adapt_u_proposal = false;

  ConjugateSampler smp(data, nullptr, prm, sim, prior, cfg, 515);
  REQUIRE(smp.u() == 1.0);

  NigPrior np(prior);
  const double u = 1.0;
  std::vector<std::string> keys;
  std::vector<double> logmass;
  for_each_partition(5, [&](const std::vector<std::int32_t>& a) {
    const int k = 1 + *std::max_element(a.begin(), a.end());
    double lm = 0.0;
    for (int j = 0; j < k; ++j) {
      SufficientStats st(2);
      int nj = 0;
      for (int i = 0; i < 5; ++i)
        if (a[i] == j) {
          st.add(data.design.row(i).transpose(), data.y[i]);
          ++nj;
        }
      lm += log_cohesion(u, nj, prm) + np.log_marginal(st);
    }
    keys.push_back(partition_key(a));
    logmass.push_back(lm);
  });
  const double mx = *std::max_element(logmass.begin(), logmass.end());
  double z = 0.0;
  for (double v : logmass) z += std::exp(v - mx);
  std::map<std::string, double> exact;
  for (std::size_t i = 0; i < keys.size(); ++i)
    exact[keys[i]] = std::exp(logmass[i] - mx) / z;

  std::map<std::string, long> counts;
  const int burn = 500, keep = 30000;
  for (int t = 0; t < burn; ++t) smp.reassign_all();
  for (int t = 0; t < keep; ++t) {
    smp.reassign_all();
    ++counts[partition_key(smp.alloc())];
  }
  CHECK(smp.u() == 1.0);
  CHECK(total_variation(exact, counts, keep) < 0.05);
}

TEST_CASE("the full chain leaves the joint partition posterior invariant") {
  // small enough to enumerate: mass = prior partition integral x similarity
  // x block marginals, all three factors exercised at once
  Eigen::VectorXd y(5);
  y << -2.0, -1.1, 0.3, 1.0, 2.1;
  RegressionDataset data =
      make_regression_dataset(y, random_covariates(5, 2, 0, 2207));

  const NggParams prm{0.8, 0.25};
  SimilarityConfig sim;
  sim.family = SimilarityFamily::GC;
  sim.lambda = 0.7;
  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Zero(3);
  prior.B0 = Eigen::MatrixXd::Identity(3, 3) * 4.0;
  prior.a0 = 3.0;
  prior.b0 = 2.0;

  NigPrior np(prior);
  std::vector<std::string> keys;
  std::vector<double> logmass;
  for_each_partition(5, [&](const std::vector<std::int32_t>& a) {
    const int k = 1 + *std::max_element(a.begin(), a.end());
    std::vector<std::int32_t> sizes;
    double lm = 0.0;
    for (int j = 0; j < k; ++j) {
      std::vector<std::int32_t> block;
      SufficientStats st(3);
      for (int i = 0; i < 5; ++i)
        if (a[i] == j) {
          block.push_back(i);
          st.add(data.design.row(i).transpose(), data.y[i]);
        }
      sizes.push_back(static_cast<std::int32_t>(block.size()));
      lm += log_similarity(compactness(block, data.X).d_total, sim) +
            np.log_marginal(st);
    }
    keys.push_back(partition_key(a));
    logmass.push_back(lm + eppf_log_mass(sizes, prm));
  });
  const double mx = *std::max_element(logmass.begin(), logmass.end());
  double z = 0.0;
  for (double v : logmass) z += std::exp(v - mx);
  std::map<std::string, double> exact;
  for (std::size_t i = 0; i < keys.size(); ++i)
    exact[keys[i]] = std::exp(logmass[i] - mx) / z;

  SamplerConfig cfg;
  cfg.n_iter = 33000;
  cfg.n_burnin = 3000;
  cfg.adapt_u_proposal = true;
  const ConjTrace trace =
      run_chain_conjugate(data, &data.X, prm, sim, prior, cfg, 917);
  REQUIRE(static_cast<int>(trace.rows.size()) == 30000);
  std::map<std::string, long> counts;
  for (const ConjTraceRow& row : trace.rows)
    ++counts[partition_key(row.alloc)];
  CHECK(total_variation(exact, counts, 30000) < 0.05);
}

TEST_CASE("successive conditional simulation recovers the prior block count law") {
  // redrawing the responses from the sampled parameters each round makes the
  // partition marginal equal to its prior, which has an exact distribution
  const int n = 20;
  Eigen::VectorXd y0(n);
  Rng init_rng(13);
  for (int i = 0; i < n; ++i) y0[i] = init_rng.normal();
  RegressionDataset data =
      make_regression_dataset(y0, random_covariates(n, 1, 0, 20));

  const NggParams prm{1.0, 0.3};
  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Zero(2);
  prior.B0 = Eigen::MatrixXd::Identity(2, 2) * 2.0;
  prior.a0 = 3.0;
  prior.b0 = 2.0;
  SimilarityConfig sim;  // ONE
  SamplerConfig cfg;
  cfg.n_iter = 1;
  cfg.n_burnin = 0;
  cfg.u_proposal_sd = 1.2;
  cfg.adapt_u_proposal = false;

  ConjugateSampler smp(data, nullptr, prm, sim, prior, cfg, 31415);
  Rng yrng(777);
  auto refresh_y = [&]() {
    for (int i = 0; i < n; ++i) {
      const ConjClusterParams& par = smp.params()[smp.alloc()[i]];
      data.y[i] = yrng.normal(data.design.row(i).dot(par.beta),
                              std::sqrt(par.sigma2));
    }
    smp.rebuild_stats();
  };

  const int warm = 2000, rounds = 20000;
  for (int t = 0; t < warm; ++t) {
    refresh_y();
    smp.sweep();
  }
  std::vector<double> ks;
  ks.reserve(rounds);
  double u_lo = smp.u(), u_hi = smp.u();
  for (int t = 0; t < rounds; ++t) {
    refresh_y();
    smp.sweep();
    ks.push_back(static_cast<double>(smp.k()));
    u_lo = std::min(u_lo, smp.u());
    u_hi = std::max(u_hi, smp.u());
  }
  REQUIRE(u_hi > u_lo);  // the auxiliary chain must actually move

  const std::vector<double> pmf = exact_block_count_pmf(n, prm);
  double e_exact = 0.0, v_exact = 0.0;
  for (int k = 1; k <= n; ++k) e_exact += k * pmf[k];
  for (int k = 1; k <= n; ++k)
    v_exact += (k - e_exact) * (k - e_exact) * pmf[k];

  const auto [mean_k, se_k] = batch_mean_se(ks, 100);
  REQUIRE(se_k < 0.08);
  CHECK(std::fabs(mean_k - e_exact) < 3.5 * se_k + 0.01);

  std::vector<double> sq(ks.size());
  for (std::size_t t = 0; t < ks.size(); ++t)
    sq[t] = (ks[t] - e_exact) * (ks[t] - e_exact);
  const auto [var_k, se_v] = batch_mean_se(sq, 100);
  CHECK(std::fabs(var_k - v_exact) < 3.5 * se_v + 0.05);
}

TEST_CASE("scan order does not change the stationary distribution") {
  const int n = 30;
  Rng gen(3030);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double mu = (i < 10) ? -4.0 : (i < 20 ? 0.0 : 4.0);
    y[i] = mu + 0.5 * gen.normal();
  }
  RegressionDataset data =
      make_regression_dataset(y, random_covariates(n, 2, 1, 31));

  const NggParams prm{1.0, 0.2};
  SimilarityConfig sim;
  sim.family = SimilarityFamily::GC;
  sim.lambda = 0.5;
  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Zero(4);
  prior.B0 = Eigen::MatrixXd::Identity(4, 4) * 25.0;
  prior.a0 = 2.5;
  prior.b0 = 1.5;
  SamplerConfig cfg;
  cfg.n_iter = 1;
  cfg.u_proposal_sd = 1.0;
  cfg.adapt_u_proposal = false;

  const int burn = 500, keep = 10000;
  std::vector<long> hist_a(n + 2, 0), hist_b(n + 2, 0);

  ConjugateSampler a(data, &data.X, prm, sim, prior, cfg, 111);
  for (int t = 0; t < burn; ++t) a.sweep();
  for (int t = 0; t < keep; ++t) {
    a.sweep();
    ++hist_a[a.k()];
  }

  ConjugateSampler b(data, &data.X, prm, sim, prior, cfg, 222);
  Rng shuffle_rng(333);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  auto random_scan = [&]() {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i],
                order[shuffle_rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
    b.step_u();
    b.reassign_all(order);
    b.refresh_params();
  };
  for (int t = 0; t < burn; ++t) random_scan();
  for (int t = 0; t < keep; ++t) {
    random_scan();
    ++hist_b[b.k()];
  }

  double tv = 0.0;
  for (int k = 0; k <= n + 1; ++k)
    tv += std::fabs(hist_a[k] - hist_b[k]) / double(keep);
  CHECK(0.5 * tv < 0.06);
}

TEST_CASE("incremental statistics survive a long adaptive run intact") {
  const int n = 40;
  Rng gen(4040);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = (i < 20 ? -3.0 : 3.0) + gen.normal();
  RegressionDataset data =
      make_regression_dataset(y, random_covariates(n, 2, 1, 41));

  const NggParams prm{0.7, 0.3};
  SimilarityConfig sim;
  sim.family = SimilarityFamily::GB;
  sim.lambda = 0.8;
  sim.alpha = 1.5;
  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Zero(4);
  prior.B0 = Eigen::MatrixXd::Identity(4, 4) * 16.0;
  prior.a0 = 2.5;
  prior.b0 = 1.5;
  SamplerConfig cfg;
  cfg.n_iter = 250;
  cfg.n_burnin = 100;
  cfg.init = InitKind::KmeansStyle;

  ConjugateSampler smp(data, &data.X, prm, sim, prior, cfg, 505);
  for (int t = 0; t < 250; ++t) smp.sweep();

  // allocation stays canonical: labels appear in first-use order
  const std::vector<std::int32_t>& alloc = smp.alloc();
  int seen = 0;
  for (int i = 0; i < n; ++i) {
    REQUIRE(alloc[i] <= seen);
    if (alloc[i] == seen) ++seen;
  }
  REQUIRE(seen == smp.k());
  REQUIRE(static_cast<int>(smp.stats().size()) == smp.k());
  REQUIRE(static_cast<int>(smp.params().size()) == smp.k());

  int total = 0;
  for (int j = 0; j < smp.k(); ++j) {
    SufficientStats ref(4);
    for (int i = 0; i < n; ++i)
      if (alloc[i] == j) ref.add(data.design.row(i).transpose(), data.y[i]);
    const SufficientStats& inc = smp.stats()[j];
    total += inc.n;
    REQUIRE(inc.n == ref.n);
    CHECK((inc.xtx - ref.xtx).norm() <= 1e-9 * (1.0 + ref.xtx.norm()));
    CHECK((inc.xty - ref.xty).norm() <= 1e-9 * (1.0 + ref.xty.norm()));
    CHECK(inc.yty == doctest::Approx(ref.yty).epsilon(1e-9));
  }
  CHECK(total == n);
  for (double lp : smp.last_log_pred()) CHECK(std::isfinite(lp));

  // peeking at reassignment weights must not disturb the state
  const std::vector<std::int32_t> alloc_before = smp.alloc();
  const double u_before = smp.u();
  std::vector<double> yty_before;
  for (const SufficientStats& st : smp.stats()) yty_before.push_back(st.yty);
  for (int i : {0, 7, 19, 39}) {
    // detaching a singleton dissolves its block, so one fewer candidate
    const bool singleton = [&] {
      int c = 0;
      for (std::int32_t a : alloc_before) c += (a == alloc_before[i]);
      return c == 1;
    }();
    const std::vector<double> w = smp.peek_log_weights(i);
    REQUIRE(static_cast<int>(w.size()) == smp.k() + (singleton ? 0 : 1));
    for (double v : w) CHECK(std::isfinite(v));
  }
  CHECK(smp.alloc() == alloc_before);
  CHECK(smp.u() == u_before);
  REQUIRE(smp.stats().size() == yty_before.size());
  for (std::size_t j = 0; j < yty_before.size(); ++j)
    CHECK(smp.stats()[j].yty ==
          doctest::Approx(yty_before[j]).epsilon(1e-9));
}

TEST_CASE("single item runs, trace shapes, and config errors") {
  SUBCASE("one item stays in one block and its log predictive is the marginal") {
    RegressionDataset d = intercept_only(Eigen::VectorXd::Constant(1, 0.7));
    ConjPriorConfig prior;
    prior.mu0 = Eigen::VectorXd::Zero(1);
    prior.B0 = Eigen::MatrixXd::Identity(1, 1) * 3.0;
    prior.a0 = 2.5;
    prior.b0 = 1.2;
    SamplerConfig cfg;
    cfg.n_iter = 5;
    cfg.n_burnin = 2;
    ConjugateSampler smp(d, nullptr, NggParams{1.0, 0.2}, SimilarityConfig{},
                         prior, cfg, 11);
    smp.reassign(0);
    REQUIRE(smp.k() == 1);
    REQUIRE(smp.alloc()[0] == 0);
    SufficientStats s(1);
    s.add(Eigen::VectorXd::Ones(1), 0.7);
    CHECK(smp.last_log_pred()[0] ==
          doctest::Approx(smp.prior().log_marginal(s)).epsilon(1e-12));
    const ConjTrace tr = smp.run();
    REQUIRE(tr.rows.size() == 3);
    for (const ConjTraceRow& row : tr.rows) {
      REQUIRE(row.alloc.size() == 1);
      CHECK(row.alloc[0] == 0);
      REQUIRE(row.params.size() == 1);
      CHECK(row.params[0].sigma2 > 0.0);
    }
  }

  SUBCASE("trace length and row shapes") {
    Rng gen(88);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) y[i] = gen.normal();
    RegressionDataset data =
        make_regression_dataset(y, random_covariates(8, 1, 0, 9));
    ConjPriorConfig prior;
    prior.mu0 = Eigen::VectorXd::Zero(2);
    prior.B0 = Eigen::MatrixXd::Identity(2, 2) * 4.0;
    SamplerConfig cfg;
    cfg.n_iter = 12;
    cfg.n_burnin = 4;
    ConjTrace tr = run_chain_conjugate(data, nullptr, NggParams{1.0, 0.0},
                                       SimilarityConfig{}, prior, cfg, 21);
    REQUIRE(tr.rows.size() == 8);
    for (const ConjTraceRow& row : tr.rows) {
      REQUIRE(row.alloc.size() == 8);
      REQUIRE(row.log_pred.size() == 8);
      const int k =
          1 + *std::max_element(row.alloc.begin(), row.alloc.end());
      REQUIRE(static_cast<int>(row.params.size()) == k);
      CHECK(row.u > 0.0);
    }

    cfg.n_iter = 0;
    cfg.n_burnin = 0;
    ConjTrace empty = run_chain_conjugate(data, nullptr, NggParams{1.0, 0.0},
                                          SimilarityConfig{}, prior, cfg, 21);
    CHECK(empty.rows.empty());
  }

  SUBCASE("invalid configurations are rejected") {
    Rng gen(12);
    Eigen::VectorXd y(4);
    for (int i = 0; i < 4; ++i) y[i] = gen.normal();
    RegressionDataset data =
        make_regression_dataset(y, random_covariates(4, 1, 0, 5));

    ConjPriorConfig wrong_p;
    wrong_p.mu0 = Eigen::VectorXd::Zero(3);
    wrong_p.B0 = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(ConjugateSampler(data, nullptr, NggParams{}, {}, wrong_p,
                                     {}, 1),
                    DimensionMismatch);

    ConjPriorConfig bad_b0;
    bad_b0.mu0 = Eigen::VectorXd::Zero(2);
    bad_b0.B0 = Eigen::MatrixXd::Identity(2, 2);
    bad_b0.B0(0, 0) = -1.0;
    CHECK_THROWS_AS(NigPrior{bad_b0}, ValidationError);

    ConjPriorConfig ok;
    ok.mu0 = Eigen::VectorXd::Zero(2);
    ok.B0 = Eigen::MatrixXd::Identity(2, 2);
    SamplerConfig bad_cfg;
    bad_cfg.n_iter = 5;
    bad_cfg.n_burnin = 9;
    CHECK_THROWS_AS(ConjugateSampler(data, nullptr, NggParams{}, {}, ok,
                                     bad_cfg, 1),
                    ValidationError);
  }
}

TEST_CASE("identical seeds give identical traces") {
  const int n = 25;
  Rng gen(2525);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = (i % 2 ? 2.0 : -2.0) + gen.normal();
  RegressionDataset data =
      make_regression_dataset(y, random_covariates(n, 2, 1, 26));

  const NggParams prm{0.9, 0.15};
  SimilarityConfig sim;
  sim.family = SimilarityFamily::GC;
  sim.lambda = 0.6;
  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Zero(4);
  prior.B0 = Eigen::MatrixXd::Identity(4, 4) * 9.0;
  SamplerConfig cfg;
  cfg.n_iter = 60;
  cfg.n_burnin = 20;
  cfg.init = InitKind::KmeansStyle;

  const ConjTrace t1 =
      run_chain_conjugate(data, &data.X, prm, sim, prior, cfg, 9001);
  const ConjTrace t2 =
      run_chain_conjugate(data, &data.X, prm, sim, prior, cfg, 9001);
  REQUIRE(t1.rows.size() == t2.rows.size());
  for (std::size_t r = 0; r < t1.rows.size(); ++r) {
    const ConjTraceRow& a = t1.rows[r];
    const ConjTraceRow& b = t2.rows[r];
    REQUIRE(a.alloc == b.alloc);
    REQUIRE(a.u == b.u);
    REQUIRE(a.log_pred == b.log_pred);
    REQUIRE(a.params.size() == b.params.size());
    for (std::size_t j = 0; j < a.params.size(); ++j) {
      REQUIRE(a.params[j].sigma2 == b.params[j].sigma2);
      REQUIRE(a.params[j].beta == b.params[j].beta);
    }
  }

  const ConjTrace t3 =
      run_chain_conjugate(data, &data.X, prm, sim, prior, cfg, 9002);
  bool differs = false;
  for (std::size_t r = 0; r < t3.rows.size() && !differs; ++r)
    differs = t3.rows[r].u != t1.rows[r].u || t3.rows[r].alloc != t1.rows[r].alloc;
  CHECK(differs);
}

TEST_CASE("well separated groups are recovered from a cold start") {
  const int n = 20;
  std::vector<std::int32_t> expected(n);
  for (int i = 0; i < n; ++i) expected[i] = i < 10 ? 0 : 1;

  ConjPriorConfig prior;
  prior.mu0 = Eigen::VectorXd::Zero(1);
  prior.B0 = Eigen::MatrixXd::Constant(1, 1, 1e6);
  prior.a0 = 2.0;
  prior.b0 = 1.0;
  SamplerConfig cfg;
  cfg.n_iter = 100;
  cfg.n_burnin = 99;

  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng gen(seed * 131);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i)
      y[i] = (i < 10 ? -100.0 : 100.0) + 0.1 * gen.normal();
    RegressionDataset data = intercept_only(y);
    const ConjTrace tr =
        run_chain_conjugate(data, nullptr, NggParams{1.0, 0.0},
                            SimilarityConfig{}, prior, cfg, seed);
    REQUIRE(tr.rows.size() == 1);
    if (tr.rows[0].alloc == expected) ++hits;
  }
  CHECK(hits >= 4);
}
