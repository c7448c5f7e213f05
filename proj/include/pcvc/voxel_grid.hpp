#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pcvc/vec3.hpp"

namespace pcvc {

// Hash index over a sparse voxel set, for whole-frame neighbor queries.
class VoxelHash {
public:
  explicit VoxelHash(std::span<const Vec3i> coords) {
    map_.reserve(coords.size() * 2);
    for (uint32_t i = 0; i < coords.size(); ++i) map_.emplace(pack_coord(coords[i]), i);
  }

  std::optional<uint32_t> find(Vec3i c) const {
    auto it = map_.find(pack_coord(c));
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

private:
  std::unordered_map<int64_t, uint32_t> map_;
};

// Dense occupancy grid over a small axis-aligned region. Used as the inner
// structure of block-level searches: O(1) box occupancy counts via prefix
// sums and nearest-occupied-cell queries by expanding Chebyshev shells.
class DenseGrid {
public:
  DenseGrid(Vec3i lo, Vec3i hi)
      : lo_(lo), dim_{hi.x - lo.x, hi.y - lo.y, hi.z - lo.z} {
    cell_.assign(size_t(dim_.x) * dim_.y * dim_.z, 0);
  }

  Vec3i lo() const { return lo_; }
  Vec3i hi() const { return lo_ + dim_; }

  bool contains(Vec3i c) const {
    const Vec3i r = c - lo_;
    return r.x >= 0 && r.y >= 0 && r.z >= 0 && r.x < dim_.x && r.y < dim_.y && r.z < dim_.z;
  }

  // Inserts voxel `index` at coordinate c; c must lie inside the region and
  // coordinates must be unique.
  void insert(Vec3i c, uint32_t index) { cell_[flat(c)] = index + 1; }

  // Must be called after the last insert and before count_in_box.
  void build_counts() {
    psum_.assign(size_t(dim_.x + 1) * (dim_.y + 1) * (dim_.z + 1), 0);
    const size_t sy = dim_.z + 1, sx = size_t(dim_.y + 1) * (dim_.z + 1);
    for (int x = 0; x < dim_.x; ++x)
      for (int y = 0; y < dim_.y; ++y)
        for (int z = 0; z < dim_.z; ++z) {
          const size_t p = size_t(x + 1) * sx + (y + 1) * sy + (z + 1);
          psum_[p] = (cell_[(size_t(x) * dim_.y + y) * dim_.z + z] ? 1u : 0u) +
                     psum_[p - sx] + psum_[p - sy] + psum_[p - 1] - psum_[p - sx - sy] -
                     psum_[p - sx - 1] - psum_[p - sy - 1] + psum_[p - sx - sy - 1];
        }
  }

  // Occupied-cell count in [lo, hi) clipped to the region.
  uint32_t count_in_box(Vec3i lo, Vec3i hi) const {
    Vec3i a = clip(lo), b = clip(hi);
    if (a.x >= b.x || a.y >= b.y || a.z >= b.z) return 0;
    auto at = [&](int x, int y, int z) {
      return psum_[(size_t(x) * (dim_.y + 1) + y) * (dim_.z + 1) + z];
    };
    return at(b.x, b.y, b.z) - at(a.x, b.y, b.z) - at(b.x, a.y, b.z) - at(b.x, b.y, a.z) +
           at(a.x, a.y, b.z) + at(a.x, b.y, a.z) + at(b.x, a.y, a.z) - at(a.x, a.y, a.z);
  }

  // Nearest occupied cell to `query` among cells in [lo, hi), by Euclidean
  // distance; ties resolved toward the lexicographically smallest coordinate.
  std::optional<uint32_t> nearest_in_box(Vec3i query, Vec3i lo, Vec3i hi) const {
    lo = {std::max(lo.x, lo_.x), std::max(lo.y, lo_.y), std::max(lo.z, lo_.z)};
    hi = {std::min(hi.x, lo_.x + dim_.x), std::min(hi.y, lo_.y + dim_.y),
          std::min(hi.z, lo_.z + dim_.z)};
    if (lo.x >= hi.x || lo.y >= hi.y || lo.z >= hi.z) return std::nullopt;

    int64_t best_d2 = std::numeric_limits<int64_t>::max();
    Vec3i best_c{};
    uint32_t best_idx = 0;
    bool found = false;
    auto consider = [&](Vec3i c) {
      const uint32_t slot = cell_[flat(c)];
      if (!slot) return;
      const int64_t d2 = dist2(c, query);
      if (d2 < best_d2 || (d2 == best_d2 && c < best_c)) {
        best_d2 = d2;
        best_c = c;
        best_idx = slot - 1;
        found = true;
      }
    };

    // Max Chebyshev distance from query to any box cell.
    const int rmax = std::max({std::max(query.x - lo.x, hi.x - 1 - query.x),
                               std::max(query.y - lo.y, hi.y - 1 - query.y),
                               std::max(query.z - lo.z, hi.z - 1 - query.z)});
    for (int r = 0; r <= rmax; ++r) {
      // A cell at Chebyshev radius r is at Euclidean distance >= r.
      if (found && int64_t(r) * r > best_d2) break;
      if (r == 0) {
        if (query.x >= lo.x && query.x < hi.x && query.y >= lo.y && query.y < hi.y &&
            query.z >= lo.z && query.z < hi.z)
          consider(query);
        continue;
      }
      const int ylo = std::max(query.y - r, lo.y), yhi = std::min(query.y + r, hi.y - 1);
      const int zlo = std::max(query.z - r, lo.z), zhi = std::min(query.z + r, hi.z - 1);
      for (int x : {query.x - r, query.x + r}) {
        if (x < lo.x || x >= hi.x) continue;
        for (int y = ylo; y <= yhi; ++y)
          for (int z = zlo; z <= zhi; ++z) consider({x, y, z});
      }
      const int xlo = std::max(query.x - r + 1, lo.x), xhi = std::min(query.x + r - 1, hi.x - 1);
      for (int y : {query.y - r, query.y + r}) {
        if (y < lo.y || y >= hi.y) continue;
        for (int x = xlo; x <= xhi; ++x)
          for (int z = zlo; z <= zhi; ++z) consider({x, y, z});
      }
      const int ylo2 = std::max(query.y - r + 1, lo.y), yhi2 = std::min(query.y + r - 1, hi.y - 1);
      for (int z : {query.z - r, query.z + r}) {
        if (z < lo.z || z >= hi.z) continue;
        for (int x = xlo; x <= xhi; ++x)
          for (int y = ylo2; y <= yhi2; ++y) consider({x, y, z});
      }
    }
    if (!found) return std::nullopt;
    return best_idx;
  }

private:
  size_t flat(Vec3i c) const {
    const Vec3i r = c - lo_;
    return (size_t(r.x) * dim_.y + r.y) * dim_.z + r.z;
  }

  Vec3i lo_, dim_;
  std::vector<uint32_t> cell_;
  std::vector<uint32_t> psum_;

  Vec3i clip(Vec3i c) const {
    return {std::clamp(c.x - lo_.x, 0, dim_.x), std::clamp(c.y - lo_.y, 0, dim_.y),
            std::clamp(c.z - lo_.z, 0, dim_.z)};
  }
};

}  // namespace pcvc
