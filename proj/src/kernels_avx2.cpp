#include "ppmxmixt/kernels.hpp"

// Compiled with -mavx2 -mfma on x86-64 only; other targets fall through to
// the scalar table via the #else branch at the bottom.

#ifdef __AVX2__

#include <immintrin.h>

#include <cmath>

namespace ppmxmixt::kern {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, swapped));
}

double v_sum(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i];
  return acc;
}

double v_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4),
                           acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double v_sumsq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    out += d * d;
  }
  return out;
}

double v_vmax(const double* a, std::size_t n) {
  if (n < 4) {
    double m = a[0];
    for (std::size_t i = 1; i < n; ++i)
      if (a[i] > m) m = a[i];
    return m;
  }
  __m256d acc = _mm256_loadu_pd(a);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
  double m = hmax(acc);
  for (; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

void v_dist_sq_accum(const double* coord, double c, double* r2,
                     std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(coord + i), vc);
    __m256d acc = _mm256_fmadd_pd(d, d, _mm256_loadu_pd(r2 + i));
    _mm256_storeu_pd(r2 + i, acc);
  }
  for (; i < n; ++i) {
    const double d = coord[i] - c;
    r2[i] += d * d;
  }
}

double v_sum_sqrt(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_loadu_pd(a + i)));
  double out = hsum(acc);
  for (; i < n; ++i) out += std::sqrt(a[i]);
  return out;
}

void v_recip_sqrt(const double* a, double* out, std::size_t n) {
  const __m256d ones = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_sqrt_pd(_mm256_loadu_pd(a + i));
    _mm256_storeu_pd(out + i, _mm256_div_pd(ones, s));
  }
  for (; i < n; ++i) out[i] = 1.0 / std::sqrt(a[i]);
}

double v_skew_resid_sumsq(const double* y, const double* eta, double alpha,
                          double psi, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vp = _mm256_set1_pd(psi);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_sub_pd(_mm256_loadu_pd(y + i), va);
    r = _mm256_fnmadd_pd(vp, _mm256_loadu_pd(eta + i), r);
    acc = _mm256_fmadd_pd(r, r, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) {
    const double r = y[i] - alpha - psi * eta[i];
    out += r * r;
  }
  return out;
}

void v_coclust_accum(const std::int32_t* labels, std::size_t n,
                     std::int32_t* counts) {
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const __m256i li = _mm256_set1_epi32(labels[i]);
    std::int32_t* row = counts + i * n;
    std::size_t j = i + 1;
    for (; j + 8 <= n; j += 8) {
      __m256i lj =
          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(labels + j));
      __m256i mask = _mm256_cmpeq_epi32(lj, li);
      __m256i cur =
          _mm256_loadu_si256(reinterpret_cast<__m256i*>(row + j));
      // mask lanes are 0 or -1, so subtracting adds one per match
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(row + j),
                          _mm256_sub_epi32(cur, mask));
    }
    const std::int32_t sli = labels[i];
    for (; j < n; ++j) row[j] += (labels[j] == sli);
  }
}

}  // namespace

const Funcs& avx2() {
  static const Funcs f = {v_sum,       v_dot,        v_sumsq_diff,
                          v_vmax,      v_dist_sq_accum, v_sum_sqrt,
                          v_recip_sqrt, v_skew_resid_sumsq, v_coclust_accum};
  return f;
}

bool avx2_compiled() { return true; }

}  // namespace ppmxmixt::kern

#else  // !__AVX2__

namespace ppmxmixt::kern {

const Funcs& avx2() { return scalar(); }
bool avx2_compiled() { return false; }

}  // namespace ppmxmixt::kern

#endif
