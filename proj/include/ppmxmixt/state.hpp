#pragma once

#include <cstdint>
#include <vector>

#include "ppmxmixt/covariates.hpp"
#include "ppmxmixt/params.hpp"
#include "ppmxmixt/partition.hpp"
#include "ppmxmixt/similarity.hpp"

namespace ppmxmixt {

// Partition bookkeeping shared by every sampler: member lists, canonical
// labels after each move, and the per-block compactness cache with its
// warm-start/stash reuse. Likelihood-side caches (sufficient statistics,
// cluster parameters) live with the callers, which keep them aligned by
// applying last_perm() after each detach/attach.
//
// Move protocol for item i:
//   detach(i);                  // caller downdates its own cache first
//   ... apply last_perm() ...
//   log_sim_ratio(j, i) for each candidate block j
//   attach(i, j);               // j == k() opens a new block
//   ... apply last_perm() ...
class PartitionState {
 public:
  // X may be null when cfg.family == ONE; geometry is skipped entirely then
  PartitionState(const MixedCovariateMatrix* X, const SimilarityConfig& cfg,
                 int n);

  void reset(const std::vector<std::int32_t>& alloc);

  int n() const { return n_; }
  int k() const { return static_cast<int>(blocks_.size()); }
  const std::vector<std::int32_t>& alloc() const { return alloc_; }
  std::int32_t label_of(int i) const { return alloc_[i]; }
  const std::vector<std::int32_t>& members(int j) const { return blocks_[j]; }
  int size(int j) const { return static_cast<int>(blocks_[j].size()); }
  Partition partition() const;

  bool tracks_geometry() const { return use_geom_; }
  const MixedCovariateMatrix* geometry_source() const { return X_; }
  const ClusterGeometry& geometry(int j) const { return geom_[j]; }
  double block_d(int j) const { return use_geom_ ? geom_[j].d_total : 0.0; }

  void detach(int i);
  bool origin_dissolved() const { return origin_ < 0; }
  // post-detach index of the block i left; -1 when it dissolved
  int origin() const { return origin_; }

  // log g(D_{A_j u {i}}) - log g(D_{A_j}); caches the candidate geometry for
  // reuse if attach(i, j) follows
  double log_sim_ratio(int j, int i);

  void attach(int i, int j);

  // old-label -> new-label map from the last detach or attach; empty when no
  // relabeling happened
  const std::vector<std::int32_t>& last_perm() const { return perm_; }

  // permutes a caller-side per-block vector by last_perm()
  template <class T>
  void apply_last_perm(std::vector<T>& v) const {
    if (perm_.empty()) return;
    std::vector<T> tmp(v.size());
    for (std::size_t old = 0; old < v.size(); ++old)
      tmp[perm_[old]] = std::move(v[old]);
    v = std::move(tmp);
  }

 private:
  void recanonicalize();
  void recompute_geometry(int j, const double* warm);

  int n_;
  const MixedCovariateMatrix* X_;
  SimilarityConfig cfg_;
  bool use_geom_;

  std::vector<std::int32_t> alloc_;
  std::vector<std::vector<std::int32_t>> blocks_;
  std::vector<ClusterGeometry> geom_;
  std::vector<std::int32_t> perm_;

  GeometryWorkspace ws_;
  std::vector<std::int32_t> tmp_members_;
  std::vector<ClusterGeometry> cand_;
  std::vector<std::uint32_t> cand_round_;
  std::uint32_t round_ = 0;
  ClusterGeometry stash_;
  bool stash_valid_ = false;
  int origin_ = -1;
};

}  // namespace ppmxmixt
