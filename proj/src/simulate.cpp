#include "ppmxmixt/simulate.hpp"

#include <cmath>

#include "ppmxmixt/errors.hpp"

namespace ppmxmixt {

LabeledRegression simulate_benchmark_regression(Rng& rng, MetricKind metric) {
  const int sizes[3] = {75, 75, 50};
  const double mu[3][2] = {{-3.0, 3.0}, {0.0, 0.0}, {3.0, 3.0}};
  const double q[3] = {0.1, 0.5, 0.9};
  const double beta[3][5] = {{1.0, 5.0, 2.0, 1.0, 0.0},
                             {4.0, 2.0, -2.0, 1.0, -1.0},
                             {-1.0, -5.0, -2.0, -1.0, 1.0}};
  const double sd = std::sqrt(0.5);

  const int n = sizes[0] + sizes[1] + sizes[2];
  Eigen::VectorXd y(n);
  Eigen::MatrixXd cont(n, 2);
  Eigen::MatrixXd bin(n, 2);
  LabeledRegression out;
  out.truth.reserve(n);

  int i = 0;
  for (int g = 0; g < 3; ++g)
    for (int r = 0; r < sizes[g]; ++r, ++i) {
      cont(i, 0) = mu[g][0] + sd * rng.normal();
      cont(i, 1) = mu[g][1] + sd * rng.normal();
      bin(i, 0) = rng.uniform() < q[g] ? 1.0 : 0.0;
      bin(i, 1) = rng.uniform() < q[g] ? 1.0 : 0.0;
      const double mean = beta[g][0] + beta[g][1] * cont(i, 0) +
                          beta[g][2] * cont(i, 1) + beta[g][3] * bin(i, 0) +
                          beta[g][4] * bin(i, 1);
      y[i] = mean + sd * rng.normal();
      out.truth.push_back(g);
    }

  out.data = make_regression_dataset(
      std::move(y), make_covariates(std::move(cont), std::move(bin), metric));
  return out;
}

LabeledRecurrent simulate_recurrent(const RecurrentSimSpec& spec, Rng& rng,
                                    MetricKind metric) {
  if (spec.clusters.empty()) throw SpecError("no clusters specified");
  if (spec.sizes.size() != spec.clusters.size())
    throw SpecError("cluster count and size list disagree");
  for (int s : spec.sizes)
    if (s < 1) throw SpecError("every cluster needs at least one subject");
  for (const RecurrentSimCluster& c : spec.clusters) {
    if (!(c.sigma2 > 0.0)) throw SpecError("cluster sigma2 must be positive");
    if (!(c.cov_bern >= 0.0 && c.cov_bern <= 1.0))
      throw SpecError("cluster cov_bern must lie in [0, 1]");
  }
  if (!(spec.window > 0.0)) throw SpecError("window must be positive");
  if (spec.mc < 0 || spec.mb < 0) throw SpecError("negative covariate count");
  if (spec.beta_fixed.size() != spec.mc + spec.mb)
    throw SpecError("beta_fixed length must equal mc + mb");
  if (spec.beta_time.size() > 1)
    throw SpecError("beta_time supports length 0 or 1");
  const int p2 = static_cast<int>(spec.beta_time.size());

  int n = 0;
  for (int s : spec.sizes) n += s;

  RecurrentDataset d;
  d.subjects.reserve(n);
  d.p1 = spec.mc + spec.mb;
  d.p2 = p2;
  Eigen::MatrixXd cont(n, spec.mc);
  Eigen::MatrixXd bin(n, spec.mb);
  LabeledRecurrent out;
  out.truth.reserve(n);

  int i = 0;
  for (std::size_t g = 0; g < spec.clusters.size(); ++g) {
    const RecurrentSimCluster& cl = spec.clusters[g];
    const double noise_sd = std::sqrt(cl.sigma2);
    for (int r = 0; r < spec.sizes[g]; ++r, ++i) {
      Eigen::VectorXd xf(d.p1);
      for (int j = 0; j < spec.mc; ++j)
        xf[j] = cont(i, j) = cl.cov_shift + rng.normal();
      for (int j = 0; j < spec.mb; ++j)
        xf[spec.mc + j] = bin(i, j) = rng.uniform() < cl.cov_bern ? 1.0 : 0.0;
      const double base = cl.alpha + xf.dot(spec.beta_fixed);

      RecSubject s;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        s.y.clear();
        s.x_time.clear();
        double total = 0.0;
        bool censored = false;
        for (int t = 0; t < 10000; ++t) {
          double loc = base;
          if (p2 > 0) loc += spec.beta_time[0] * t;
          const double lg = loc + cl.psi * std::fabs(rng.normal()) +
                            noise_sd * rng.normal();
          if (p2 > 0) s.x_time.push_back(Eigen::VectorXd::Constant(1, t));
          if (total + std::exp(lg) > spec.window) {
            censored = true;
            break;
          }
          total += std::exp(lg);
          s.y.push_back(lg);
        }
        if (!censored)
          throw SpecError(
              "window too large: a subject accumulated 10000 gaps without "
              "crossing it");
        if (!s.y.empty()) {
          s.censor_bound = std::log(spec.window - total);
          break;
        }
        // first gap crossed the window: no observed occasion, redraw
        if (attempt == 999)
          throw SpecError(
              "window too small: a subject's first gap keeps crossing it");
      }
      s.x_fixed = std::move(xf);
      d.subjects.push_back(std::move(s));
      out.truth.push_back(static_cast<std::int32_t>(g));
    }
  }

  if (spec.mc + spec.mb > 0) {
    d.X = make_covariates(std::move(cont), std::move(bin), metric);
  } else {
    d.X.n = n;
  }
  finalize(d);
  out.data = std::move(d);
  return out;
}

}  // namespace ppmxmixt
