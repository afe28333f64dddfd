#pragma once

// Helpers shared by the statistical test suites: the exact block-count law
// of the partition prior, a set-partition enumerator for small-n posterior
// oracles, and batch-mean standard errors for chain output.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ppmxmixt/cohesion.hpp"
#include "ppmxmixt/covariates.hpp"
#include "ppmxmixt/params.hpp"
#include "ppmxmixt/rng.hpp"

namespace ppmxmixt::test {

inline double lse2(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log of the summed block-size products over all partitions of n items into k
// blocks, built by the add-one-item recursion; paired with the auxiliary-u
// integral this gives the exact distribution of the block count
inline std::vector<std::vector<double>> log_w_table(int n, double sigma) {
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> w(n + 1, std::vector<double>(n + 1, ninf));
  w[1][1] = 0.0;
  for (int m = 1; m < n; ++m)
    for (int k = 1; k <= m; ++k) {
      if (w[m][k] == ninf) continue;
      w[m + 1][k] = lse2(w[m + 1][k], std::log(m - sigma * k) + w[m][k]);
      w[m + 1][k + 1] = lse2(w[m + 1][k + 1], w[m][k]);
    }
  return w;
}

inline std::vector<double> exact_block_count_pmf(int n, const NggParams& prm) {
  auto w = log_w_table(n, prm.sigma);
  std::vector<double> pmf(n + 1, 0.0);
  for (int k = 1; k <= n; ++k)
    pmf[k] = std::exp(k * std::log(prm.kappa) + w[n][k] +
                      log_u_integral(n, k, prm) - std::lgamma(double(n)));
  return pmf;
}

namespace detail {
template <class F>
void partitions_rec(std::vector<std::int32_t>& a, int i, int used, F& visit) {
  if (i == static_cast<int>(a.size())) {
    visit(a);
    return;
  }
  for (int c = 0; c <= used; ++c) {
    a[i] = c;
    partitions_rec(a, i + 1, std::max(used, c + 1), visit);
  }
}
}  // namespace detail

// visits every set partition of {0..n-1} as a restricted-growth string
template <class F>
void for_each_partition(int n, F visit) {
  std::vector<std::int32_t> a(n, 0);
  detail::partitions_rec(a, 0, 0, visit);
}

// canonical string key of an allocation vector, invariant to label names
inline std::string partition_key(const std::vector<std::int32_t>& alloc) {
  std::vector<int> relabel(alloc.size(), -1);
  std::string key;
  key.reserve(alloc.size());
  int next = 0;
  for (std::int32_t a : alloc) {
    if (relabel[a] < 0) relabel[a] = next++;
    key.push_back(static_cast<char>('a' + relabel[a]));
  }
  return key;
}

// chain mean with a batch-mean standard error; n_batches contiguous batches,
// remainder dropped
inline std::pair<double, double> batch_mean_se(const std::vector<double>& xs,
                                               int n_batches) {
  const int len = static_cast<int>(xs.size()) / n_batches;
  double grand = 0.0;
  std::vector<double> bm(n_batches, 0.0);
  for (int b = 0; b < n_batches; ++b) {
    for (int t = 0; t < len; ++t) bm[b] += xs[b * len + t];
    bm[b] /= len;
    grand += bm[b];
  }
  grand /= n_batches;
  double s2 = 0.0;
  for (int b = 0; b < n_batches; ++b)
    s2 += (bm[b] - grand) * (bm[b] - grand);
  s2 /= (n_batches - 1);
  return {grand, std::sqrt(s2 / n_batches)};
}

inline MixedCovariateMatrix random_covariates(int n, int mc, int mb,
                                              std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd cont(n, mc);
  Eigen::MatrixXd bin(n, mb);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < mc; ++d) cont(i, d) = rng.normal();
    for (int d = 0; d < mb; ++d) bin(i, d) = rng.uniform() < 0.5 ? 1.0 : 0.0;
  }
  return make_covariates(cont, bin, MetricKind::Identity);
}

}  // namespace ppmxmixt::test
