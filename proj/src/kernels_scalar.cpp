#include "ppmxmixt/kernels.hpp"

#include <cmath>

namespace ppmxmixt::kern {
namespace {

double s_sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double s_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double s_sumsq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double s_vmax(const double* a, std::size_t n) {
  double m = a[0];
  for (std::size_t i = 1; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

void s_dist_sq_accum(const double* coord, double c, double* r2,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = coord[i] - c;
    r2[i] += d * d;
  }
}

double s_sum_sqrt(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::sqrt(a[i]);
  return acc;
}

void s_recip_sqrt(const double* a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / std::sqrt(a[i]);
}

double s_skew_resid_sumsq(const double* y, const double* eta, double alpha,
                          double psi, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - alpha - psi * eta[i];
    acc += r * r;
  }
  return acc;
}

void s_coclust_accum(const std::int32_t* labels, std::size_t n,
                     std::int32_t* counts) {
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::int32_t li = labels[i];
    std::int32_t* row = counts + i * n;
    for (std::size_t j = i + 1; j < n; ++j) row[j] += (labels[j] == li);
  }
}

}  // namespace

const Funcs& scalar() {
  static const Funcs f = {s_sum,       s_dot,        s_sumsq_diff,
                          s_vmax,      s_dist_sq_accum, s_sum_sqrt,
                          s_recip_sqrt, s_skew_resid_sumsq, s_coclust_accum};
  return f;
}

}  // namespace ppmxmixt::kern
