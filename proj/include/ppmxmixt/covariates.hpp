#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "ppmxmixt/errors.hpp"

namespace ppmxmixt {

enum class MetricKind { Pooled, Identity };

// Mixed continuous/binary covariates with a fixed Mahalanobis metric for the
// continuous part. The metric M = L L^T is applied once at construction by
// whitening every row (z_i = L^T x_i), after which every distance and
// centroid computation is plain Euclidean in z-space. Whitened coordinates
// are stored column-per-item so block gathers touch contiguous memory.
struct MixedCovariateMatrix {
  Eigen::MatrixXd continuous;  // n x m_c raw rows
  Eigen::MatrixXd binary;      // n x m_b, entries in {0,1}
  Eigen::MatrixXd metric;      // m_c x m_c SPD
  Eigen::MatrixXd chol_lt;     // upper-triangular L^T with M = L L^T
  Eigen::MatrixXd zt;          // m_c x n whitened coordinates, column i = L^T x_i
  Eigen::MatrixXd bt;          // m_b x n transposed binary
  int n = 0, mc = 0, mb = 0;
  double wc = 0.0, wb = 0.0;  // m_c/m and m_b/m distance weights

  Eigen::VectorXd whiten(const Eigen::VectorXd& x) const {
    return chol_lt * x;
  }

  // centroid back-transform: solve L^T c = z
  Eigen::VectorXd unwhiten(const Eigen::VectorXd& z) const {
    return chol_lt.triangularView<Eigen::Upper>().solve(z);
  }

  double distance(int i, int j) const {
    double d = 0.0;
    if (mc > 0) d += wc * (zt.col(i) - zt.col(j)).norm();
    if (mb > 0) d += wb * (bt.col(i) - bt.col(j)).cwiseAbs().sum() / mb;
    return d;
  }
};

inline MixedCovariateMatrix make_covariates(Eigen::MatrixXd continuous,
                                            Eigen::MatrixXd binary,
                                            MetricKind kind = MetricKind::Pooled) {
  MixedCovariateMatrix X;
  X.n = static_cast<int>(continuous.rows() > 0 ? continuous.rows()
                                               : binary.rows());
  X.mc = static_cast<int>(continuous.cols());
  X.mb = static_cast<int>(binary.cols());
  if (X.mc > 0 && X.mb > 0 && continuous.rows() != binary.rows())
    throw DimensionMismatch("continuous and binary row counts differ");
  const int m = X.mc + X.mb;
  if (m == 0) throw DimensionMismatch("no covariate columns");
  X.wc = static_cast<double>(X.mc) / m;
  X.wb = static_cast<double>(X.mb) / m;
  for (int i = 0; i < binary.rows(); ++i)
    for (int j = 0; j < binary.cols(); ++j) {
      const double v = binary(i, j);
      if (v != 0.0 && v != 1.0)
        throw ValidationError("binary covariate entry not in {0,1} at row " +
                              std::to_string(i) + " column " +
                              std::to_string(j));
    }
  X.continuous = std::move(continuous);
  X.binary = std::move(binary);

  if (X.mc > 0) {
    Eigen::MatrixXd M;
    if (kind == MetricKind::Identity || X.n < 2) {
      M = Eigen::MatrixXd::Identity(X.mc, X.mc);
    } else {
      const Eigen::MatrixXd centered =
          X.continuous.rowwise() - X.continuous.colwise().mean();
      Eigen::MatrixXd cov =
          centered.transpose() * centered / static_cast<double>(X.n - 1);
      const double ridge = 1e-8 * cov.diagonal().mean();
      if (!(ridge > 0.0)) {
        // every continuous column constant: metric irrelevant, stay defined
        M = Eigen::MatrixXd::Identity(X.mc, X.mc);
      } else {
        cov.diagonal().array() += ridge;
        M = cov.llt().solve(Eigen::MatrixXd::Identity(X.mc, X.mc));
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
      throw DegenerateCovariates("metric is not positive definite");
    X.metric = std::move(M);
    X.chol_lt = llt.matrixU();
    X.zt = X.chol_lt * X.continuous.transpose();
  }
  if (X.mb > 0) X.bt = X.binary.transpose();
  return X;
}

// explicit SPD metric variant
inline MixedCovariateMatrix make_covariates(Eigen::MatrixXd continuous,
                                            Eigen::MatrixXd binary,
                                            Eigen::MatrixXd metric) {
  MixedCovariateMatrix X =
      make_covariates(std::move(continuous), std::move(binary),
                      MetricKind::Identity);
  if (X.mc > 0) {
    if (metric.rows() != X.mc || metric.cols() != X.mc)
      throw DimensionMismatch("metric dimension does not match m_c");
    Eigen::LLT<Eigen::MatrixXd> llt(metric);
    if (llt.info() != Eigen::Success)
      throw DegenerateCovariates("metric is not positive definite");
    X.metric = std::move(metric);
    X.chol_lt = llt.matrixU();
    X.zt = X.chol_lt * X.continuous.transpose();
  }
  return X;
}

}  // namespace ppmxmixt
