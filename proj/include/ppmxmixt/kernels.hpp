#pragma once

#include <cstddef>
#include <cstdint>

// Inner-loop numeric kernels. Every entry has a scalar reference
// implementation and (on x86-64) an AVX2 variant; the active table is chosen
// once at runtime from cpuid, overridable with PPMXMIXT_SIMD=scalar|avx2.
// Variants are equivalence-tested against each other, so callers may treat
// the backends as interchangeable up to floating-point reassociation.

namespace ppmxmixt::kern {

struct Funcs {
  // sum of a[0..n)
  double (*sum)(const double* a, std::size_t n);
  // dot product of a and b
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum of (a[i] - b[i])^2
  double (*sumsq_diff)(const double* a, const double* b, std::size_t n);
  // max of a[0..n), n >= 1
  double (*vmax)(const double* a, std::size_t n);
  // r2[i] += (coord[i] - c)^2; one whitened coordinate of a distance pass
  void (*dist_sq_accum)(const double* coord, double c, double* r2,
                        std::size_t n);
  // sum of sqrt(a[i]), a[i] >= 0
  double (*sum_sqrt)(const double* a, std::size_t n);
  // out[i] = 1 / sqrt(a[i]); caller guards zeros
  void (*recip_sqrt)(const double* a, double* out, std::size_t n);
  // sum of (y[i] - alpha - psi * eta[i])^2
  double (*skew_resid_sumsq)(const double* y, const double* eta, double alpha,
                             double psi, std::size_t n);
  // counts[i*n + j] += (labels[i] == labels[j]) for all pairs i < j;
  // counts is a row-major n*n matrix, only the upper triangle is touched
  void (*coclust_accum)(const std::int32_t* labels, std::size_t n,
                        std::int32_t* counts);
};

const Funcs& scalar();
const Funcs& avx2();    // falls back to scalar when not compiled in
const Funcs& active();  // runtime-selected table
const char* active_name();
bool avx2_compiled();

// max-shifted log(sum(exp(a[i]))); exp accumulation stays scalar so both
// backends agree to the last bit for identical inputs
double logsumexp(const double* a, std::size_t n);

}  // namespace ppmxmixt::kern
