#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"
#include "pcvc/voxel_grid.hpp"

namespace pcvc {

// One point of a half-resolution reference cloud. Coordinates are stored on
// the doubled grid (coord2x = 2 * voxel coordinate), so original voxels land
// on even coordinates and interpolated midpoints carry at least one odd
// component.
struct SuperVoxel {
  Vec3i coord2x;
  Vec3d attr;
  bool fractional = false;
};

struct SuperCloud {
  std::vector<SuperVoxel> voxels;  // sorted by coord2x
  int source_depth = 0;
};

// All unordered voxel pairs within Euclidean distance rho, as index pairs
// (i, j) with i < j, sorted. The radius test is inclusive at the real value:
// integer squared distances get a small slack so rho = sqrt(3) admits
// distance-sqrt(3) pairs despite sqrt(3)^2 rounding below 3.
inline std::vector<std::pair<uint32_t, uint32_t>> neighbor_pairs(const Frame& frame, double rho) {
  if (!(rho > 0.0)) throw DomainError("neighbor radius must be positive");
  const double r2 = rho * rho + 1e-9;
  const int reach = int(std::floor(std::sqrt(r2)));

  std::vector<Vec3i> coords(frame.voxels.size());
  for (size_t i = 0; i < frame.voxels.size(); ++i) coords[i] = frame.voxels[i].coord;
  VoxelHash hash(coords);

  std::vector<Vec3i> offsets;
  for (int dx = -reach; dx <= reach; ++dx)
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dz = -reach; dz <= reach; ++dz) {
        const Vec3i d{dx, dy, dz};
        if (d == Vec3i{0, 0, 0}) continue;
        if (double(d.norm2()) <= r2) offsets.push_back(d);
      }

  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  for (uint32_t i = 0; i < coords.size(); ++i)
    for (const Vec3i& d : offsets)
      if (auto j = hash.find(coords[i] + d); j && *j > i) pairs.emplace_back(i, *j);
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

// Builds the fractionally super-resolved reference: every input voxel plus
// the midpoint of every neighbor pair within rho, the midpoint attribute
// being the pair average. Pairs sharing a midpoint are merged by averaging
// their pair averages. Midpoints that fall back onto the integer lattice
// (possible only for rho >= 2) are dropped in favor of the integer voxel.
inline SuperCloud superresolve(const Frame& frame, double rho) {
  if (frame.color_space != ColorSpace::YUV)
    throw StateError("superresolve expects YUV attributes");

  SuperCloud out;
  out.source_depth = frame.depth;
  out.voxels.reserve(frame.voxels.size() * 4);
  for (const Voxel& v : frame.voxels)
    out.voxels.push_back({v.coord * 2, v.attr, false});

  struct Acc {
    Vec3d sum{0, 0, 0};
    int n = 0;
  };
  std::unordered_map<Vec3i, Acc> mids;
  const auto pairs = neighbor_pairs(frame, rho);
  mids.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    const Voxel& a = frame.voxels[i];
    const Voxel& b = frame.voxels[j];
    Acc& acc = mids[a.coord + b.coord];  // midpoint on the doubled grid
    acc.sum = acc.sum + (a.attr + b.attr) * 0.5;
    acc.n += 1;
  }
  for (const auto& [c2, acc] : mids) {
    if (c2.x % 2 == 0 && c2.y % 2 == 0 && c2.z % 2 == 0) continue;
    out.voxels.push_back({c2, acc.sum * (1.0 / acc.n), true});
  }

  std::sort(out.voxels.begin(), out.voxels.end(),
            [](const SuperVoxel& a, const SuperVoxel& b) { return a.coord2x < b.coord2x; });
  return out;
}

// Indices of super-voxels with coord2x inside [lo, hi), using the sort order
// to slice the x range first.
inline std::vector<uint32_t> supercloud_in_box(const SuperCloud& sc, Vec3i lo, Vec3i hi) {
  auto xless = [](const SuperVoxel& v, int x) { return v.coord2x.x < x; };
  const auto first = std::lower_bound(sc.voxels.begin(), sc.voxels.end(), lo.x, xless);
  const auto last = std::lower_bound(sc.voxels.begin(), sc.voxels.end(), hi.x, xless);
  std::vector<uint32_t> idx;
  for (auto it = first; it != last; ++it) {
    const Vec3i c = it->coord2x;
    if (c.y >= lo.y && c.y < hi.y && c.z >= lo.z && c.z < hi.z)
      idx.push_back(uint32_t(it - sc.voxels.begin()));
  }
  return idx;
}

}  // namespace pcvc
