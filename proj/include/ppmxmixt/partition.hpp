#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppmxmixt/errors.hpp"

namespace ppmxmixt {

// Partition of {0..n-1} as per-item block labels. Canonical form orders
// blocks by their smallest member, i.e. labels appear in first-occurrence
// order when scanning items left to right.
struct Partition {
  std::vector<std::int32_t> alloc;
  std::int32_t k = 0;
};

// relabels in place to canonical form; returns old-label -> new-label map so
// per-block caches can be permuted alongside
inline std::vector<std::int32_t> canonical_relabel(Partition& p) {
  std::vector<std::int32_t> map(p.k, -1);
  std::int32_t next = 0;
  for (auto& s : p.alloc) {
    if (map[s] < 0) map[s] = next++;
    s = map[s];
  }
  p.k = next;
  return map;
}

inline Partition make_partition(std::vector<std::int32_t> alloc) {
  Partition p;
  p.alloc = std::move(alloc);
  std::int32_t mx = -1;
  for (auto s : p.alloc)
    if (s > mx) mx = s;
  p.k = mx + 1;
  canonical_relabel(p);
  return p;
}

inline void validate(const Partition& p, std::size_t n) {
  if (p.alloc.size() != n)
    throw SizeMismatch("partition has " + std::to_string(p.alloc.size()) +
                       " allocations for " + std::to_string(n) + " items");
  if (n == 0) return;
  std::int32_t max_used = -1;
  for (auto s : p.alloc) {
    if (s < 0 || s >= p.k)
      throw NonContiguousLabels("label " + std::to_string(s) +
                                " outside [0, " + std::to_string(p.k) + ")");
    if (s > max_used) max_used = s;
  }
  std::vector<std::int32_t> count(p.k, 0);
  for (auto s : p.alloc) count[s]++;
  for (std::int32_t l = 0; l < p.k; ++l) {
    if (count[l] > 0) continue;
    if (l < max_used)
      throw NonContiguousLabels("label " + std::to_string(l) + " skipped");
    throw EmptyBlock("declared block " + std::to_string(l) + " has no items");
  }
}

inline std::vector<std::int32_t> block_sizes(const Partition& p) {
  std::vector<std::int32_t> sizes(p.k, 0);
  for (auto s : p.alloc) sizes[s]++;
  return sizes;
}

inline std::vector<std::vector<std::int32_t>> blocks_of(const Partition& p) {
  std::vector<std::vector<std::int32_t>> blocks(p.k);
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(p.alloc.size()); ++i)
    blocks[p.alloc[i]].push_back(i);
  return blocks;
}

}  // namespace ppmxmixt
