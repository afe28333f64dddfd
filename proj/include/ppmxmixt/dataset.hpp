#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ppmxmixt/covariates.hpp"
#include "ppmxmixt/errors.hpp"
#include "ppmxmixt/partition.hpp"

namespace ppmxmixt {

// Regression data: responses plus mixed covariates; the regression design
// row is (1, continuous..., binary...) so an intercept always rides along.
struct RegressionDataset {
  Eigen::VectorXd y;
  MixedCovariateMatrix X;
  Eigen::MatrixXd design;  // n x p rows used by the likelihood

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(design.cols()); }
};

inline Eigen::MatrixXd build_design(const MixedCovariateMatrix& X) {
  Eigen::MatrixXd D(X.n, 1 + X.mc + X.mb);
  D.col(0).setOnes();
  if (X.mc > 0) D.middleCols(1, X.mc) = X.continuous;
  if (X.mb > 0) D.middleCols(1 + X.mc, X.mb) = X.binary;
  return D;
}

inline RegressionDataset make_regression_dataset(Eigen::VectorXd y,
                                                 MixedCovariateMatrix X) {
  if (y.size() != X.n)
    throw SizeMismatch("response length " + std::to_string(y.size()) +
                       " does not match covariate rows " + std::to_string(X.n));
  RegressionDataset d;
  d.y = std::move(y);
  d.design = build_design(X);
  d.X = std::move(X);
  return d;
}

// One subject's recurrent-event record. censor_bound is the lower bound of
// the unobserved (m_i+1)-th log gap; a -inf bound means the subject carries
// no censored occasion at all (used by reduction tests; CSV-loaded data
// always has a finite bound).
struct RecSubject {
  std::vector<double> y;                  // observed log gap-times, length m_i
  double censor_bound =
      -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x_fixed;                // p1 regression covariates
  std::vector<Eigen::VectorXd> x_time;    // p2-vectors for occasions 1..T_i

  int m() const { return static_cast<int>(y.size()); }
  bool has_censored() const { return std::isfinite(censor_bound); }
  // occasions entering the likelihood, censored one included
  int horizon() const { return m() + (has_censored() ? 1 : 0); }
};

struct RecurrentDataset {
  std::vector<RecSubject> subjects;
  MixedCovariateMatrix X;  // static covariates driving the similarity
  int p1 = 0;              // fixed-design length
  int p2 = 0;              // time-varying design length, may be 0
  int J = 0;               // max horizon over subjects

  int n() const { return static_cast<int>(subjects.size()); }
};

inline void finalize(RecurrentDataset& d) {
  d.J = 0;
  for (int i = 0; i < d.n(); ++i) {
    const RecSubject& s = d.subjects[i];
    if (s.m() < 1)
      throw ValidationError("subject " + std::to_string(i) +
                            " has no observed gap times");
    if (static_cast<int>(s.x_time.size()) != s.horizon() && d.p2 > 0)
      throw SizeMismatch("subject " + std::to_string(i) + " has " +
                         std::to_string(s.x_time.size()) +
                         " occasion covariate rows for horizon " +
                         std::to_string(s.horizon()));
    if (s.x_fixed.size() != d.p1)
      throw SizeMismatch("subject " + std::to_string(i) +
                         " fixed covariates do not match p1");
    d.J = std::max(d.J, s.horizon());
  }
  if (d.X.n != d.n())
    throw SizeMismatch("similarity covariate rows do not match subject count");
}

}  // namespace ppmxmixt
