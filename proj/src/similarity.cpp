#include "ppmxmixt/similarity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "ppmxmixt/errors.hpp"
#include "ppmxmixt/kernels.hpp"

namespace ppmxmixt {

namespace {

constexpr double kStopTol = 1e-11;       // stricter than the 1e-9 contract
constexpr double kCoincideSq = 1e-24;    // absolute floor for the snap radius
constexpr int kFixedPointIter = 200;     // plain iterations before Newton

// fills ws.coords with member coordinates, one contiguous row per dimension
void gather_coords(const std::int32_t* items, int m,
                   const MixedCovariateMatrix& X, GeometryWorkspace& ws) {
  const int mc = X.mc;
  ws.coords.resize(static_cast<std::size_t>(mc) * m);
  for (int d = 0; d < mc; ++d) {
    double* row = ws.coords.data() + static_cast<std::size_t>(d) * m;
    for (int j = 0; j < m; ++j) row[j] = X.zt(d, items[j]);
  }
}

void distances_sq(const GeometryWorkspace& ws, const double* c, int mc, int m,
                  double* r2) {
  std::fill(r2, r2 + m, 0.0);
  const auto& k = kern::active();
  for (int d = 0; d < mc; ++d)
    k.dist_sq_accum(ws.coords.data() + static_cast<std::size_t>(d) * m, c[d],
                    r2, m);
}

// One damped fixed-point step; returns squared step length, or a negative
// value when c is already stationary. Members within the snap radius count
// as coincident with the iterate: the escape rate of the plain update decays
// with the distance to a data point, so close passes must be treated as hits
// or the iteration orbits the point indefinitely.
double fixed_point_step(GeometryWorkspace& ws, int mc, int m, double* c,
                        double snap2) {
  const auto& k = kern::active();
  distances_sq(ws, c, mc, m, ws.r2.data());
  int n_coincide = 0;
  for (int j = 0; j < m; ++j) n_coincide += (ws.r2[j] < snap2);
  std::array<double, 64> cnew_buf;
  double* cnew = cnew_buf.data();
  if (n_coincide == 0) {
    k.recip_sqrt(ws.r2.data(), ws.inv_r.data(), m);
    const double W = k.sum(ws.inv_r.data(), m);
    for (int d = 0; d < mc; ++d)
      cnew[d] = k.dot(ws.coords.data() + static_cast<std::size_t>(d) * m,
                      ws.inv_r.data(), m) /
                W;
  } else if (n_coincide == m) {
    return -1.0;  // every member sits on the iterate
  } else {
    // iterate sits on a data point: damped step away along the pulled
    // direction, stationary when the multiplicity dominates the pull
    for (int j = 0; j < m; ++j)
      ws.inv_r[j] = (ws.r2[j] < snap2) ? 0.0 : 1.0 / std::sqrt(ws.r2[j]);
    const double W = k.sum(ws.inv_r.data(), m);
    double rnorm2 = 0.0;
    for (int d = 0; d < mc; ++d) {
      const double num =
          k.dot(ws.coords.data() + static_cast<std::size_t>(d) * m,
                ws.inv_r.data(), m);
      const double Rd = num - c[d] * W;
      cnew[d] = num / W;  // T(c) over the non-coincident members
      rnorm2 += Rd * Rd;
    }
    const double rnorm = std::sqrt(rnorm2);
    if (rnorm <= static_cast<double>(n_coincide)) return -1.0;  // stationary
    const double g = static_cast<double>(n_coincide) / rnorm;
    for (int d = 0; d < mc; ++d) cnew[d] = (1.0 - g) * cnew[d] + g * c[d];
  }
  double step2 = 0.0;
  for (int d = 0; d < mc; ++d) {
    const double s = cnew[d] - c[d];
    step2 += s * s;
    c[d] = cnew[d];
  }
  return step2;
}

double objective_at(GeometryWorkspace& ws, int mc, int m, const double* c) {
  distances_sq(ws, c, mc, m, ws.r2.data());
  return kern::active().sum_sqrt(ws.r2.data(), m);
}

// first-order optimality of the data point with index j: the norm of the
// pull from the other members must not exceed the multiplicity of the point
bool vertex_optimal(GeometryWorkspace& ws, int mc, int m, int j,
                    double snap2) {
  std::array<double, 64> zj;
  for (int d = 0; d < mc; ++d)
    zj[d] = ws.coords[static_cast<std::size_t>(d) * m + j];
  distances_sq(ws, zj.data(), mc, m, ws.r2.data());
  int multiplicity = 0;
  for (int i = 0; i < m; ++i) {
    if (ws.r2[i] < snap2) {
      ++multiplicity;
      ws.inv_r[i] = 0.0;
    } else {
      ws.inv_r[i] = 1.0 / std::sqrt(ws.r2[i]);
    }
  }
  double rnorm2 = 0.0;
  for (int d = 0; d < mc; ++d) {
    const double* row = ws.coords.data() + static_cast<std::size_t>(d) * m;
    const double pull =
        kern::active().dot(row, ws.inv_r.data(), m) -
        zj[d] * kern::active().sum(ws.inv_r.data(), m);
    rnorm2 += pull * pull;
  }
  return std::sqrt(rnorm2) <= static_cast<double>(multiplicity) + 1e-10;
}

int nearest_member(GeometryWorkspace& ws, int mc, int m, const double* c,
                   double* rmin2_out) {
  distances_sq(ws, c, mc, m, ws.r2.data());
  int jmin = 0;
  for (int j = 1; j < m; ++j)
    if (ws.r2[j] < ws.r2[jmin]) jmin = j;
  *rmin2_out = ws.r2[jmin];
  return jmin;
}

// geometric median of the gathered coordinates; c holds the start point on
// entry and the solution on exit. Fixed-point iteration first; when it
// stalls (thin configurations have contraction rates near 1) and the iterate
// is clear of every data point, the smooth objective is finished off with
// damped Newton steps.
void weiszfeld(GeometryWorkspace& ws, int mc, int m, double* c) {
  ws.r2.resize(m);
  ws.inv_r.resize(m);
  // snap radius relative to the configuration size, so warm starts that land
  // a few ulps from a member are treated as sitting on it
  double diag2 = 0.0;
  for (int d = 0; d < mc; ++d) {
    const double* row = ws.coords.data() + static_cast<std::size_t>(d) * m;
    const auto [lo, hi] = std::minmax_element(row, row + m);
    diag2 += (*hi - *lo) * (*hi - *lo);
  }
  const double snap2 = std::max(kCoincideSq, 1e-20 * diag2);
  // smallest meaningful move at this coordinate scale; asking for less just
  // cycles on gradient roundoff
  const double step_tol = 1e-12 * std::sqrt(std::max(1.0, diag2));

  for (int iter = 0; iter < kFixedPointIter; ++iter) {
    const double step2 = fixed_point_step(ws, mc, m, c, snap2);
    if (step2 < kStopTol * kStopTol) return;
  }

  Eigen::Map<Eigen::VectorXd> cv(c, mc);
  for (int iter = 0; iter < 100; ++iter) {
    // stalls happen either while creeping toward an optimal vertex or in
    // thin smooth configurations; resolve the vertex case exactly first
    double rmin2 = 0.0;
    const int jmin = nearest_member(ws, mc, m, c, &rmin2);
    if (vertex_optimal(ws, mc, m, jmin, snap2)) {
      for (int d = 0; d < mc; ++d)
        c[d] = ws.coords[static_cast<std::size_t>(d) * m + jmin];
      return;
    }
    if (rmin2 < std::max(1e-16, snap2)) {
      // a suboptimal vertex pins the plain update and starves the smooth
      // model; restart exactly on the vertex so the multiplicity-damped
      // step clears it in one move. When even that step cannot improve on
      // the incoming point, the minimum is this close to the vertex and the
      // incoming point already carries it to roundoff.
      const double f_in = objective_at(ws, mc, m, c);
      std::array<double, 64> c_in;
      for (int d = 0; d < mc; ++d) {
        c_in[d] = c[d];
        c[d] = ws.coords[static_cast<std::size_t>(d) * m + jmin];
      }
      fixed_point_step(ws, mc, m, c, snap2);
      if (objective_at(ws, mc, m, c) >= f_in - 1e-12 * (1.0 + f_in)) {
        for (int d = 0; d < mc; ++d) c[d] = c_in[d];
        return;
      }
      continue;
    }
    distances_sq(ws, c, mc, m, ws.r2.data());
    kern::active().recip_sqrt(ws.r2.data(), ws.inv_r.data(), m);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(mc);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(mc, mc);
    Eigen::VectorXd diff(mc);
    for (int j = 0; j < m; ++j) {
      const double ir = ws.inv_r[j];
      for (int d = 0; d < mc; ++d)
        diff[d] = c[d] - ws.coords[static_cast<std::size_t>(d) * m + j];
      grad += ir * diff;
      H += ir * (Eigen::MatrixXd::Identity(mc, mc) -
                 (ir * ir) * (diff * diff.transpose()));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) {
      if (fixed_point_step(ws, mc, m, c, snap2) < kStopTol * kStopTol)
        return;
      continue;
    }
    const Eigen::VectorXd s = llt.solve(-grad);
    const double f0 = objective_at(ws, mc, m, c);
    double t = 1.0;
    Eigen::VectorXd trial(mc);
    for (int ls = 0; ls < 40; ++ls) {
      trial = cv + t * s;
      if (objective_at(ws, mc, m, trial.data()) <= f0) break;
      t *= 0.5;
    }
    cv = trial;
    if (t * s.norm() < step_tol) return;
  }
  throw NonConvergence("geometric median iteration exceeded max iterations");
}

}  // namespace

void compactness_into(const std::int32_t* items, int m,
                      const MixedCovariateMatrix& X, GeometryWorkspace& ws,
                      const double* warm_z, ClusterGeometry& geom,
                      bool raw_centroid) {
  if (m < 1) throw EmptySet("compactness of an empty block");
  const int mc = X.mc, mb = X.mb;
  geom.centroid_z.resize(mc);
  geom.centroid_b.resize(mb);
  double d_cont = 0.0, d_bin = 0.0;

  if (mc > 0) {
    gather_coords(items, m, X, ws);
    if (m == 1) {
      for (int d = 0; d < mc; ++d) geom.centroid_z[d] = X.zt(d, items[0]);
    } else if (m == 2) {
      // any point of the segment minimizes; midpoint is the canonical pick
      for (int d = 0; d < mc; ++d)
        geom.centroid_z[d] = 0.5 * (X.zt(d, items[0]) + X.zt(d, items[1]));
    } else if (mc == 1) {
      // 1-D geometric median is the coordinate median, exactly
      ws.inv_r.assign(ws.coords.begin(), ws.coords.begin() + m);
      auto mid = ws.inv_r.begin() + m / 2;
      std::nth_element(ws.inv_r.begin(), mid, ws.inv_r.end());
      if (m % 2 == 1) {
        geom.centroid_z[0] = *mid;
      } else {
        const double hi = *mid;
        const double lo = *std::max_element(ws.inv_r.begin(), mid);
        geom.centroid_z[0] = 0.5 * (lo + hi);
      }
    } else {
      if (warm_z != nullptr) {
        for (int d = 0; d < mc; ++d) geom.centroid_z[d] = warm_z[d];
      } else {
        for (int d = 0; d < mc; ++d) {
          const double* row = ws.coords.data() + static_cast<std::size_t>(d) * m;
          geom.centroid_z[d] = kern::active().sum(row, m) / m;
        }
      }
      weiszfeld(ws, mc, m, geom.centroid_z.data());
    }
    ws.r2.resize(m);
    distances_sq(ws, geom.centroid_z.data(), mc, m, ws.r2.data());
    d_cont = X.wc * kern::active().sum_sqrt(ws.r2.data(), m);
    if (raw_centroid) geom.centroid_c = X.unwhiten(geom.centroid_z);
  }

  if (mb > 0) {
    for (int d = 0; d < mb; ++d) {
      int ones = 0;
      for (int j = 0; j < m; ++j) ones += (X.bt(d, items[j]) != 0.0);
      // strict majority of ones flips the bit; ties stay 0
      const double cb = (2 * ones > m) ? 1.0 : 0.0;
      geom.centroid_b[d] = cb;
      const int mismatches = (cb == 1.0) ? (m - ones) : ones;
      d_bin += static_cast<double>(mismatches);
    }
    d_bin *= X.wb / mb;
  }

  geom.d_total = d_cont + d_bin;
}

ClusterGeometry compactness(const std::int32_t* items, int m,
                            const MixedCovariateMatrix& X,
                            GeometryWorkspace& ws, const double* warm_z) {
  ClusterGeometry geom;
  compactness_into(items, m, X, ws, warm_z, geom, true);
  return geom;
}

ClusterGeometry compactness(const std::vector<std::int32_t>& block,
                            const MixedCovariateMatrix& X) {
  GeometryWorkspace ws;
  return compactness(block.data(), static_cast<int>(block.size()), X, ws);
}

double distance_to_centroid(const Eigen::VectorXd& zx,
                            const Eigen::VectorXd& bx,
                            const ClusterGeometry& geom,
                            const MixedCovariateMatrix& X) {
  double d = 0.0;
  if (X.mc > 0) d += X.wc * (zx - geom.centroid_z).norm();
  if (X.mb > 0) d += X.wb * (bx - geom.centroid_b).cwiseAbs().sum() / X.mb;
  return d;
}

double log_similarity(double d_total, const SimilarityConfig& cfg) {
  if (cfg.family == SimilarityFamily::ONE) return 0.0;
  const double t = cfg.lambda * d_total;
  switch (cfg.family) {
    case SimilarityFamily::GA:
      return -std::pow(t, cfg.alpha);
    case SimilarityFamily::GB:
      return -cfg.alpha * std::log1p(t);
    case SimilarityFamily::GC:
      return -t * std::log1p(t);
    default:
      return 0.0;
  }
}

double similarity(double d_total, const SimilarityConfig& cfg) {
  return std::exp(log_similarity(d_total, cfg));
}

double log_similarity_ratio(const std::vector<std::int32_t>& block,
                            std::int32_t new_item,
                            const MixedCovariateMatrix& X,
                            const SimilarityConfig& cfg) {
  if (cfg.family == SimilarityFamily::ONE) return 0.0;
  if (block.empty()) return 0.0;
  GeometryWorkspace ws;
  const ClusterGeometry before =
      compactness(block.data(), static_cast<int>(block.size()), X, ws);
  ws.idx = block;
  ws.idx.push_back(new_item);
  const ClusterGeometry after =
      compactness(ws.idx.data(), static_cast<int>(ws.idx.size()), X, ws,
                  before.centroid_z.size() ? before.centroid_z.data() : nullptr);
  return log_similarity(after.d_total, cfg) -
         log_similarity(before.d_total, cfg);
}

double calibrate_lambda(const MixedCovariateMatrix& X, double eps_star,
                        int n_mc, Rng& rng) {
  const int n = X.n;
  if (n < 3) throw ValidationError("lambda calibration needs at least 3 rows");
  if (!(eps_star > 0.0))
    throw ValidationError("similarity.eps_star must be positive");
  GeometryWorkspace ws;
  std::vector<std::int32_t> pool(n);
  double total = 0.0;
  std::int64_t count = 0;
  for (int rep = 0; rep < n_mc; ++rep) {
    for (int size = 2; size <= n - 1; ++size) {
      std::iota(pool.begin(), pool.end(), 0);
      // partial shuffle: first `size` entries form the subset, the next one
      // is the extra item
      for (int j = 0; j <= size; ++j) {
        const int swap =
            j + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - j)));
        std::swap(pool[j], pool[swap]);
      }
      const ClusterGeometry before = compactness(pool.data(), size, X, ws);
      const ClusterGeometry after =
          compactness(pool.data(), size + 1, X, ws, before.centroid_z.size()
                                                        ? before.centroid_z.data()
                                                        : nullptr);
      total += after.d_total - before.d_total;
      ++count;
    }
  }
  const double eps_hat = total / static_cast<double>(count);
  if (!(eps_hat > 1e-12))
    throw DegenerateCovariates(
        "mean compactness increment is zero; supply similarity.lambda "
        "explicitly");
  return eps_star / eps_hat;
}

}  // namespace ppmxmixt
