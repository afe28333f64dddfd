#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ppmxmixt/covariates.hpp"
#include "ppmxmixt/params.hpp"
#include "ppmxmixt/rng.hpp"

namespace ppmxmixt {

// Geometry of one block: order-1 Frechet mean of the members' covariates and
// the summed distance to it (compactness D). The binary part is a
// component-wise majority vote; the continuous part is the geometric median
// in whitened coordinates, also kept raw for reporting.
struct ClusterGeometry {
  Eigen::VectorXd centroid_c;  // raw continuous centroid, length m_c
  Eigen::VectorXd centroid_z;  // whitened continuous centroid, length m_c
  Eigen::VectorXd centroid_b;  // binary centroid in {0,1}, length m_b
  double d_total = 0.0;
};

// reusable scratch to keep the sampler inner loop allocation-free
struct GeometryWorkspace {
  std::vector<double> coords;  // m_c rows of member coordinates, row-contiguous
  std::vector<double> r2;
  std::vector<double> inv_r;
  std::vector<std::int32_t> idx;  // callers may build member lists here
};

// Compactness of the block given by items[0..m). warm_z optionally seeds the
// Weiszfeld iteration with a previous centroid (whitened space).
ClusterGeometry compactness(const std::int32_t* items, int m,
                            const MixedCovariateMatrix& X,
                            GeometryWorkspace& ws,
                            const double* warm_z = nullptr);

ClusterGeometry compactness(const std::vector<std::int32_t>& block,
                            const MixedCovariateMatrix& X);

// allocation-free variant for sampler inner loops; writes into out, and
// leaves out.centroid_c untouched unless raw_centroid is requested
void compactness_into(const std::int32_t* items, int m,
                      const MixedCovariateMatrix& X, GeometryWorkspace& ws,
                      const double* warm_z, ClusterGeometry& out,
                      bool raw_centroid = false);

// distance from an arbitrary whitened row (zx, bx) to a geometry's centroid;
// used when allocating held-out or new items
double distance_to_centroid(const Eigen::VectorXd& zx,
                            const Eigen::VectorXd& bx,
                            const ClusterGeometry& geom,
                            const MixedCovariateMatrix& X);

// log g(D); families map t = lambda*D through their penalty, ONE is log 1
double log_similarity(double d_total, const SimilarityConfig& cfg);
double similarity(double d_total, const SimilarityConfig& cfg);

// log g(D_{A u {i}}) - log g(D_A); 0 for an empty block
double log_similarity_ratio(const std::vector<std::int32_t>& block,
                            std::int32_t new_item,
                            const MixedCovariateMatrix& X,
                            const SimilarityConfig& cfg);

// Monte Carlo calibration of lambda: average compactness increment over
// uniformly drawn (subset, extra item) pairs for every size 2..n-1, repeated
// n_mc times; lambda = eps_star / mean increment.
double calibrate_lambda(const MixedCovariateMatrix& X, double eps_star,
                        int n_mc, Rng& rng);

}  // namespace ppmxmixt
