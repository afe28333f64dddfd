#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ppmxmixt/dataset.hpp"
#include "ppmxmixt/rng.hpp"

namespace ppmxmixt {

struct LabeledRegression {
  RegressionDataset data;
  std::vector<std::int32_t> truth;  // generating group of each row
};

// Three-group linear-regression benchmark with n = 200: group sizes 75, 75
// and 50 in row order; two continuous covariates drawn around group centers
// (-3,3), (0,0), (3,3) with variance 0.5 per coordinate; two binary
// covariates Bernoulli(0.1 / 0.5 / 0.9 by group); response Gaussian with
// variance 0.5 around the group's linear predictor over (1, x1..x4).
// Draw order per row is x1, x2, x3, x4, y.
LabeledRegression simulate_benchmark_regression(
    Rng& rng, MetricKind metric = MetricKind::Pooled);

struct RecurrentSimCluster {
  double alpha = 0.0;      // cluster intercept of the log gap location
  double psi = 0.0;        // skewness loading on the half-normal frailty
  double sigma2 = 1.0;     // Gaussian noise variance
  double cov_shift = 0.0;  // mean of this cluster's continuous covariates
  double cov_bern = 0.5;   // success rate of this cluster's binary covariates
};

// Synthetic recurrent-event generator. Each subject belongs to one cluster;
// its log gap at occasion t is
//   alpha_c + x_fixed' beta_fixed + x_time(t)' beta_time
//     + psi_c * |N(0,1)| + sqrt(sigma2_c) * N(0,1)
// with x_fixed = (continuous..., binary...) drawn from the cluster's
// covariate law and x_time(t) = (t - 1) when p2 = 1 (empty when p2 = 0).
// Gaps accumulate until they cross the administrative window; the crossing
// occasion is censored, so every subject carries exactly one censored
// occasion with bound log(window - observed total). Subjects whose first gap
// already crosses the window are redrawn.
struct RecurrentSimSpec {
  std::vector<RecurrentSimCluster> clusters;
  std::vector<int> sizes;       // subjects per cluster, same length
  Eigen::VectorXd beta_fixed;   // length mc + mb
  Eigen::VectorXd beta_time;    // length 0 or 1
  double window = 50.0;
  int mc = 2;
  int mb = 0;
};

struct LabeledRecurrent {
  RecurrentDataset data;
  std::vector<std::int32_t> truth;  // generating cluster of each subject
};

LabeledRecurrent simulate_recurrent(const RecurrentSimSpec& spec, Rng& rng,
                                    MetricKind metric = MetricKind::Pooled);

}  // namespace ppmxmixt
