#include "ppmxmixt/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace ppmxmixt::kern {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

struct Selection {
  const Funcs* table;
  const char* name;
};

Selection select() {
  bool want_avx2 = avx2_compiled() && cpu_has_avx2();
  if (const char* env = std::getenv("PPMXMIXT_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) want_avx2 = false;
    // "avx2" keeps the default; an unsatisfiable request degrades to scalar
  }
  if (want_avx2) return {&avx2(), "avx2"};
  return {&scalar(), "scalar"};
}

const Selection& selection() {
  static const Selection s = select();
  return s;
}

}  // namespace

const Funcs& active() { return *selection().table; }

const char* active_name() { return selection().name; }

double logsumexp(const double* a, std::size_t n) {
  if (n == 0) return -std::numeric_limits<double>::infinity();
  const double m = active().vmax(a, n);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::exp(a[i] - m);
  return m + std::log(acc);
}

}  // namespace ppmxmixt::kern
