#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ppmxmixt/errors.hpp"

namespace ppmxmixt {

struct NggParams {
  double kappa = 1.0;  // total mass
  double sigma = 0.0;  // discount in [0,1); 0 recovers the Dirichlet process
};

inline void validate(const NggParams& p) {
  if (!(p.kappa > 0.0))
    throw ValidationError("ngg.kappa must be positive, got " +
                          std::to_string(p.kappa));
  if (!(p.sigma >= 0.0 && p.sigma < 1.0))
    throw ValidationError("ngg.sigma must lie in [0,1), got " +
                          std::to_string(p.sigma));
}

enum class SimilarityFamily { GA, GB, GC, ONE };

struct SimilarityConfig {
  SimilarityFamily family = SimilarityFamily::ONE;
  double lambda = 1.0;  // temperature applied to compactness, t = lambda * D
  double alpha = 1.0;   // power, used by GA and GB
};

inline void validate(const SimilarityConfig& c) {
  if (c.family == SimilarityFamily::ONE) return;
  if (!(c.lambda > 0.0))
    throw ValidationError("similarity.lambda must be positive");
  if (!(c.alpha > 0.0)) throw ValidationError("similarity.alpha must be positive");
}

struct ConjClusterParams {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
};

struct RecClusterParams {
  double alpha_c = 0.0;  // random intercept
  double psi = 0.0;      // skewness scale
  double sigma2 = 1.0;
};

struct ConjPriorConfig {
  Eigen::VectorXd mu0;
  Eigen::MatrixXd B0;
  double a0 = 2.0;
  double b0 = 1.0;
};

inline void validate(const ConjPriorConfig& c) {
  if (!(c.a0 > 0.0)) throw ValidationError("prior.a0 must be positive");
  if (!(c.b0 > 0.0)) throw ValidationError("prior.b0 must be positive");
  if (c.B0.rows() != c.B0.cols() || c.B0.rows() != c.mu0.size())
    throw DimensionMismatch("prior.B0 and prior.mu0 dimensions disagree");
}

struct RecPriorConfig {
  double alpha0 = 0.0;
  double psi0 = 0.0;
  double kappa0 = 1.0;  // prior scale of the intercept, variance sigma2*kappa0
  double kappa1 = 1.0;  // prior scale of psi
  double a = 2.0;       // IG shape for sigma2
  double b = 1.0;       // IG scale for sigma2
  Eigen::MatrixXd Sigma0;  // p1 x p1 prior covariance of beta0
  double nu0 = 2.0;     // IG shape for xi2
  double gamma0 = 1.0;  // IG scale for xi2
  int R = 5;            // auxiliary pool size for the re-use reassignment
  // The per-observation count is what the conjugate algebra implies for the
  // sigma2 posterior shape; the subject count variant is kept selectable.
  bool shape_uses_subject_count = false;
};

inline void validate(const RecPriorConfig& c) {
  if (!(c.kappa0 > 0.0)) throw ValidationError("rec.kappa0 must be positive");
  if (!(c.kappa1 > 0.0)) throw ValidationError("rec.kappa1 must be positive");
  if (!(c.a > 0.0)) throw ValidationError("rec.a must be positive");
  if (!(c.b > 0.0)) throw ValidationError("rec.b must be positive");
  if (!(c.nu0 > 0.0)) throw ValidationError("rec.nu0 must be positive");
  if (!(c.gamma0 > 0.0)) throw ValidationError("rec.gamma0 must be positive");
  if (c.R < 1) throw ValidationError("rec.R must be at least 1");
}

enum class InitKind { Singletons, KmeansStyle };

struct SamplerConfig {
  int n_iter = 1000;
  int n_burnin = 0;
  double u_proposal_sd = 1.0;
  InitKind init = InitKind::Singletons;
  bool adapt_u_proposal = true;
};

inline void validate(const SamplerConfig& c) {
  if (c.n_iter < 0) throw ValidationError("sampler.n_iter must be nonnegative");
  if (c.n_burnin < 0 || c.n_burnin > c.n_iter)
    throw ValidationError("sampler.n_burnin must lie in [0, sampler.n_iter]");
  if (!(c.u_proposal_sd > 0.0))
    throw ValidationError("sampler.u_proposal_sd must be positive");
}

}  // namespace ppmxmixt
