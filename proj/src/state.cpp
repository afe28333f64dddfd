#include "ppmxmixt/state.hpp"

#include <algorithm>
#include <numeric>

#include "ppmxmixt/errors.hpp"

namespace ppmxmixt {

PartitionState::PartitionState(const MixedCovariateMatrix* X,
                               const SimilarityConfig& cfg, int n)
    : n_(n),
      X_(X),
      cfg_(cfg),
      use_geom_(X != nullptr && cfg.family != SimilarityFamily::ONE),
      alloc_(n, 0) {
  if (use_geom_ && n != X_->n)
    throw SizeMismatch("covariate rows " + std::to_string(X_->n) +
                       " != item count " + std::to_string(n));
}

Partition PartitionState::partition() const {
  Partition p;
  p.alloc = alloc_;
  p.k = k();
  return p;
}

void PartitionState::reset(const std::vector<std::int32_t>& alloc) {
  Partition p = make_partition(alloc);
  validate(p, static_cast<std::size_t>(n_));
  alloc_ = p.alloc;
  blocks_.assign(p.k, {});
  for (std::int32_t i = 0; i < n_; ++i) blocks_[alloc_[i]].push_back(i);
  geom_.clear();
  if (use_geom_) {
    geom_.resize(p.k);
    for (std::int32_t j = 0; j < p.k; ++j)
      compactness_into(blocks_[j].data(), size(j), *X_, ws_, nullptr,
                       geom_[j]);
  }
  stash_valid_ = false;
  origin_ = -1;
  perm_.clear();
}

void PartitionState::recompute_geometry(int j, const double* warm) {
  compactness_into(blocks_[j].data(), size(j), *X_, ws_, warm, geom_[j]);
}

// restores labels-ordered-by-smallest-member and rebuilds alloc_; every block
// must be non-empty on entry
void PartitionState::recanonicalize() {
  const int kk = k();
  perm_.clear();
  bool sorted = true;
  for (int j = 0; j + 1 < kk; ++j)
    if (blocks_[j].front() > blocks_[j + 1].front()) {
      sorted = false;
      break;
    }
  if (!sorted) {
    std::vector<std::int32_t> order(kk);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
      return blocks_[a].front() < blocks_[b].front();
    });
    perm_.assign(kk, 0);
    for (int pos = 0; pos < kk; ++pos) perm_[order[pos]] = pos;
    apply_last_perm(blocks_);
    if (use_geom_) apply_last_perm(geom_);
    if (origin_ >= 0) origin_ = perm_[origin_];
  }
  std::fill(alloc_.begin(), alloc_.end(), -1);
  for (int j = 0; j < kk; ++j)
    for (auto m : blocks_[j]) alloc_[m] = j;
}

void PartitionState::detach(int i) {
  const int b = alloc_[i];
  ++round_;
  stash_valid_ = false;
  auto& mem = blocks_[b];
  mem.erase(std::lower_bound(mem.begin(), mem.end(), i));
  if (mem.empty()) {
    blocks_.erase(blocks_.begin() + b);
    if (use_geom_) geom_.erase(geom_.begin() + b);
    origin_ = -1;
  } else {
    origin_ = b;
    if (use_geom_) {
      stash_ = std::move(geom_[b]);
      geom_[b] = ClusterGeometry{};
      stash_valid_ = true;
      recompute_geometry(b, stash_.centroid_z.data());
    }
  }
  recanonicalize();
}

double PartitionState::log_sim_ratio(int j, int i) {
  if (!use_geom_) return 0.0;
  double d_new;
  if (j == origin_ && stash_valid_) {
    d_new = stash_.d_total;
  } else {
    if (static_cast<int>(cand_.size()) < k()) {
      cand_.resize(k());
      cand_round_.resize(k(), 0);
    }
    tmp_members_ = blocks_[j];
    tmp_members_.push_back(static_cast<std::int32_t>(i));
    compactness_into(tmp_members_.data(), size(j) + 1, *X_, ws_,
                     geom_[j].centroid_z.data(), cand_[j]);
    cand_round_[j] = round_;
    d_new = cand_[j].d_total;
  }
  return log_similarity(d_new, cfg_) - log_similarity(geom_[j].d_total, cfg_);
}

void PartitionState::attach(int i, int j) {
  if (j == k()) {
    blocks_.push_back({static_cast<std::int32_t>(i)});
    if (use_geom_) {
      geom_.emplace_back();
      std::int32_t idx = static_cast<std::int32_t>(i);
      compactness_into(&idx, 1, *X_, ws_, nullptr, geom_.back());
    }
  } else {
    auto& mem = blocks_[j];
    mem.insert(std::lower_bound(mem.begin(), mem.end(), i),
               static_cast<std::int32_t>(i));
    if (use_geom_) {
      if (j == origin_ && stash_valid_) {
        geom_[j] = std::move(stash_);
      } else if (j < static_cast<int>(cand_round_.size()) &&
                 cand_round_[j] == round_) {
        geom_[j] = std::move(cand_[j]);
        cand_[j] = ClusterGeometry{};
      } else {
        recompute_geometry(j, geom_[j].centroid_z.data());
      }
    }
  }
  stash_valid_ = false;
  origin_ = -1;
  recanonicalize();
}

}  // namespace ppmxmixt
