#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"
#include "pcvc/superres.hpp"
#include "pcvc/voxel_grid.hpp"

namespace pcvc {

// Attribute value used when a prediction window holds no reference voxels.
inline constexpr Vec3d kNeutralAttr{128.0, 128.0, 128.0};

// Integer-voxel motion vector; each component spans [-15, 15] so it packs
// into 4 magnitude bits plus a sign bit.
class IntegerMV {
public:
  static constexpr int kRange = 15;

  IntegerMV() = default;
  explicit IntegerMV(Vec3i d) : d_(d) {
    for (int a = 0; a < 3; ++a)
      if (d[a] < -kRange || d[a] > kRange)
        throw DomainError("integer MV component out of [-15, 15]: " + std::to_string(d[a]));
  }

  Vec3i vec() const { return d_; }
  friend bool operator==(const IntegerMV& a, const IntegerMV& b) { return a.d_ == b.d_; }

private:
  Vec3i d_{0, 0, 0};
};

// Half-voxel refinement; components live on {-1/2, 0, +1/2} and are stored
// doubled, i.e. each component of f2() is in {-1, 0, +1}.
class FractionalMV {
public:
  FractionalMV() = default;
  explicit FractionalMV(Vec3i f2) : f2_(f2) {
    for (int a = 0; a < 3; ++a)
      if (f2[a] < -1 || f2[a] > 1)
        throw DomainError("fractional MV component out of {-1/2, 0, +1/2}");
  }

  static FractionalMV from_index(int idx) {
    if (idx < 0 || idx > 26) throw DomainError("fractional MV index out of [0, 26]");
    return FractionalMV(Vec3i{idx / 9 - 1, (idx / 3) % 3 - 1, idx % 3 - 1});
  }

  // Canonical index 9*(2fx+1) + 3*(2fy+1) + (2fz+1) in [0, 26].
  int index() const { return 9 * (f2_.x + 1) + 3 * (f2_.y + 1) + (f2_.z + 1); }
  Vec3i f2() const { return f2_; }
  bool is_zero() const { return f2_ == Vec3i{0, 0, 0}; }
  friend bool operator==(const FractionalMV& a, const FractionalMV& b) { return a.f2_ == b.f2_; }

private:
  Vec3i f2_{0, 0, 0};
};

// Hybrid integer-search score: mean nearest-neighbor geometric distance plus
// 0.35 times the mean absolute luma difference along those correspondences.
struct BlockMatchScore {
  double delta_g = 0.0;
  double delta_c = 0.0;
  double hybrid = 0.0;

  static BlockMatchScore make(double dg, double dc) { return {dg, dc, dg + 0.35 * dc}; }
};

struct Prediction {
  std::vector<Vec3d> attrs;      // one predicted attribute per block voxel
  Vec3d sse{0, 0, 0};            // per-channel SSE against the target block
  uint32_t empty_window = 0;     // 1 when the window held no reference voxels
};

namespace motion_detail {

inline Prediction finish_prediction(const Frame& target, const Block& block,
                                    std::vector<Vec3d> attrs, bool empty) {
  Prediction p;
  p.attrs = std::move(attrs);
  p.empty_window = empty ? 1 : 0;
  for (size_t k = 0; k < block.voxel_indices.size(); ++k) {
    const Vec3d d = target.voxels[block.voxel_indices[k]].attr - p.attrs[k];
    p.sse = p.sse + Vec3d{d.x * d.x, d.y * d.y, d.z * d.z};
  }
  return p;
}

// Shared fractional predictor: grid indexes super-voxels of `sc` over a
// region covering the window [lo2, hi2) on the doubled grid; `shift2` is the
// doubled total MV (2d + f2).
inline Prediction predict_super(const Frame& target, const Block& block, const SuperCloud& sc,
                                const DenseGrid& grid, Vec3i shift2, Vec3i lo2, Vec3i hi2) {
  std::vector<Vec3d> attrs(block.voxel_indices.size(), kNeutralAttr);
  const bool empty = grid.count_in_box(lo2, hi2) == 0;
  if (!empty) {
    for (size_t k = 0; k < block.voxel_indices.size(); ++k) {
      const Vec3i q = target.voxels[block.voxel_indices[k]].coord * 2 + shift2;
      if (auto idx = grid.nearest_in_box(q, lo2, hi2)) attrs[k] = sc.voxels[*idx].attr;
    }
  }
  return finish_prediction(target, block, std::move(attrs), empty);
}

inline DenseGrid make_super_grid(const SuperCloud& sc, Vec3i lo2, Vec3i hi2) {
  DenseGrid grid(lo2, hi2);
  for (uint32_t i : supercloud_in_box(sc, lo2, hi2)) grid.insert(sc.voxels[i].coord2x, i);
  grid.build_counts();
  return grid;
}

inline DenseGrid make_ref_grid(const Frame& ref, Vec3i lo, Vec3i hi) {
  DenseGrid grid(lo, hi);
  for (uint32_t i = 0; i < ref.voxels.size(); ++i) {
    const Vec3i c = ref.voxels[i].coord;
    if (grid.contains(c)) grid.insert(c, i);
  }
  grid.build_counts();
  return grid;
}

inline Prediction predict_integer(const Frame& target, const Block& block, const Frame& ref,
                                  const DenseGrid& grid, Vec3i d, Vec3i lo, Vec3i hi) {
  std::vector<Vec3d> attrs(block.voxel_indices.size(), kNeutralAttr);
  const bool empty = grid.count_in_box(lo, hi) == 0;
  if (!empty) {
    for (size_t k = 0; k < block.voxel_indices.size(); ++k) {
      const Vec3i q = target.voxels[block.voxel_indices[k]].coord + d;
      if (auto idx = grid.nearest_in_box(q, lo, hi)) attrs[k] = ref.voxels[*idx].attr;
    }
  }
  return finish_prediction(target, block, std::move(attrs), empty);
}

}  // namespace motion_detail

// Nearest-neighbor attribute-copy prediction of one block from the
// super-resolved reference. The matched window sits at the block origin
// displaced by the total MV d + f (on the doubled grid: [2*(origin + d) + f2,
// +2*size)); each target voxel copies the attribute of the window voxel
// nearest to its own displaced position, i.e. of the voxel that lands
// closest after compensating the window back by -(d + f). An empty window
// predicts the neutral gray (128, 128, 128).
inline Prediction predict_block(const Frame& target, const Block& block, const SuperCloud& sc,
                                IntegerMV d, FractionalMV f) {
  if (target.color_space != ColorSpace::YUV)
    throw StateError("predict_block expects YUV attributes");
  const Vec3i shift2 = d.vec() * 2 + f.f2();
  const Vec3i lo2 = block.origin * 2 + shift2;
  const Vec3i hi2 = lo2 + Vec3i{block.size, block.size, block.size} * 2;
  const DenseGrid grid = motion_detail::make_super_grid(sc, lo2, hi2);
  return motion_detail::predict_super(target, block, sc, grid, shift2, lo2, hi2);
}

// Integer-grid counterpart of predict_block: window [origin + d, +size) on
// the reference voxel grid.
inline Prediction predict_block_integer(const Frame& target, const Block& block, const Frame& ref,
                                        Vec3i d) {
  if (target.color_space != ColorSpace::YUV || ref.color_space != ColorSpace::YUV)
    throw StateError("predict_block_integer expects YUV attributes");
  const Vec3i lo = block.origin + d;
  const Vec3i hi = lo + Vec3i{block.size, block.size, block.size};
  const DenseGrid grid = motion_detail::make_ref_grid(ref, lo, hi);
  return motion_detail::predict_integer(target, block, ref, grid, d, lo, hi);
}

struct IvmeResult {
  IntegerMV mv;
  BlockMatchScore score;
  bool all_empty = false;  // no candidate window contained reference voxels
};

// Integer-voxel motion search: scans displacements in [-window, window]^3
// and keeps the one minimizing the hybrid geometry+luma score. Candidates
// whose window holds no reference voxels are skipped. Ties prefer the
// smaller |d|, then the lexicographically smaller d.
inline IvmeResult ivme_search(const Frame& target, const Block& block, const Frame& ref,
                              int window) {
  if (target.color_space != ColorSpace::YUV || ref.color_space != ColorSpace::YUV)
    throw StateError("ivme_search expects YUV attributes");
  if (window < 1 || window > IntegerMV::kRange)
    throw DomainError("search window must be in [1, 15]");

  const Vec3i w{window, window, window};
  const Vec3i size{block.size, block.size, block.size};
  const Vec3i rlo = block.origin - w;
  const Vec3i rhi = block.origin + size + w;
  const DenseGrid grid = motion_detail::make_ref_grid(ref, rlo, rhi);

  IvmeResult best;
  best.all_empty = true;
  double best_key = std::numeric_limits<double>::infinity();
  Vec3i best_d{0, 0, 0};
  const double inv_n = 1.0 / double(block.voxel_indices.size());

  for (int dx = -window; dx <= window; ++dx)
    for (int dy = -window; dy <= window; ++dy)
      for (int dz = -window; dz <= window; ++dz) {
        const Vec3i d{dx, dy, dz};
        const Vec3i lo = block.origin + d;
        const Vec3i hi = lo + size;
        if (grid.count_in_box(lo, hi) == 0) continue;

        double sum_dist = 0.0, sum_luma = 0.0;
        for (uint32_t vi : block.voxel_indices) {
          const Voxel& t = target.voxels[vi];
          const auto idx = grid.nearest_in_box(t.coord + d, lo, hi);
          const Voxel& r = ref.voxels[*idx];
          sum_dist += std::sqrt(double(dist2(t.coord + d, r.coord)));
          sum_luma += std::abs(t.attr.x - r.attr.x);
        }
        const BlockMatchScore s = BlockMatchScore::make(sum_dist * inv_n, sum_luma * inv_n);
        const bool better =
            s.hybrid < best_key ||
            (s.hybrid == best_key && (d.norm2() < best_d.norm2() ||
                                      (d.norm2() == best_d.norm2() && d < best_d)));
        if (best.all_empty || better) {
          best_key = s.hybrid;
          best_d = d;
          best.mv = IntegerMV(d);
          best.score = s;
          best.all_empty = false;
        }
      }
  return best;
}

struct RefineResult {
  IntegerMV mv;
  Vec3d sse{0, 0, 0};
  bool empty_window = false;  // chosen candidate's window was empty
};

// Local refinement of an integer MV: evaluates mv0 + offset for offsets in
// [-range, range]^3 by integer-grid prediction SSE summed over Y, U and V,
// skipping candidates that leave [-15, 15]^3. Ties prefer the smaller
// |offset|, then the lexicographically smaller offset.
inline RefineResult refine_iv(const Frame& target, const Block& block, const Frame& ref,
                              IntegerMV mv0, int range = 1) {
  if (range < 0) throw DomainError("refinement range must be non-negative");
  const Vec3i size{block.size, block.size, block.size};
  const Vec3i pad{range, range, range};
  const Vec3i rlo = block.origin + mv0.vec() - pad;
  const Vec3i rhi = block.origin + mv0.vec() + size + pad;
  const DenseGrid grid = motion_detail::make_ref_grid(ref, rlo, rhi);

  RefineResult best;
  double best_key = std::numeric_limits<double>::infinity();
  Vec3i best_off{0, 0, 0};
  bool first = true;

  for (int ox = -range; ox <= range; ++ox)
    for (int oy = -range; oy <= range; ++oy)
      for (int oz = -range; oz <= range; ++oz) {
        const Vec3i off{ox, oy, oz};
        const Vec3i d = mv0.vec() + off;
        if (std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)}) > IntegerMV::kRange)
          continue;
        const Vec3i lo = block.origin + d;
        const Prediction p =
            motion_detail::predict_integer(target, block, ref, grid, d, lo, lo + size);
        const double key = p.sse.x + p.sse.y + p.sse.z;
        const bool better =
            key < best_key || (key == best_key && (off.norm2() < best_off.norm2() ||
                                                   (off.norm2() == best_off.norm2() &&
                                                    off < best_off)));
        if (first || better) {
          best_key = key;
          best_off = off;
          best.mv = IntegerMV(d);
          best.sse = p.sse;
          best.empty_window = p.empty_window != 0;
          first = false;
        }
      }
  return best;
}

enum class EpredChannels { yuv, y_only };

struct FvmeResult {
  FractionalMV f;
  Vec3d sse{0, 0, 0};
  bool empty_window = false;
};

// Fractional refinement around integer MV d: evaluates all 27 half-voxel
// offsets against the super-resolved reference and keeps the one minimizing
// prediction SSE over the configured channels. Ties prefer the smaller |f|
// (the zero vector first), then the smaller canonical index.
inline FvmeResult fvme_search(const Frame& target, const Block& block, const SuperCloud& sc,
                              IntegerMV d, EpredChannels channels = EpredChannels::yuv) {
  if (target.color_space != ColorSpace::YUV)
    throw StateError("fvme_search expects YUV attributes");
  const Vec3i size{block.size, block.size, block.size};
  const Vec3i base2 = (block.origin + d.vec()) * 2;
  const Vec3i one{1, 1, 1};
  const DenseGrid grid = motion_detail::make_super_grid(sc, base2 - one, base2 + size * 2 + one);

  FvmeResult best;
  double best_key = std::numeric_limits<double>::infinity();
  int64_t best_norm = 0;
  int best_idx = 0;
  bool first = true;

  for (int idx = 0; idx < 27; ++idx) {
    const FractionalMV f = FractionalMV::from_index(idx);
    const Vec3i shift2 = d.vec() * 2 + f.f2();
    const Vec3i lo2 = block.origin * 2 + shift2;
    const Prediction p =
        motion_detail::predict_super(target, block, sc, grid, shift2, lo2, lo2 + size * 2);
    const double key =
        channels == EpredChannels::y_only ? p.sse.x : p.sse.x + p.sse.y + p.sse.z;
    const int64_t fnorm = f.f2().norm2();
    const bool better =
        key < best_key ||
        (key == best_key && (fnorm < best_norm || (fnorm == best_norm && idx < best_idx)));
    if (first || better) {
      best_key = key;
      best_norm = fnorm;
      best_idx = idx;
      best.f = f;
      best.sse = p.sse;
      best.empty_window = p.empty_window != 0;
      first = false;
    }
  }
  return best;
}

// --- integer-MV sidecar files: one "bx by bz dx dy dz" line per block, ---
// --- keyed by block origin in block units ---------------------------------

using MvMap = std::map<Vec3i, IntegerMV>;

inline void write_mv_file(const std::string& path,
                          const std::vector<std::pair<Vec3i, IntegerMV>>& entries) {
  std::ofstream out(path);
  if (!out) throw StateError("cannot open MV file for writing: " + path);
  for (const auto& [key, mv] : entries)
    out << key.x << ' ' << key.y << ' ' << key.z << ' ' << mv.vec().x << ' ' << mv.vec().y << ' '
        << mv.vec().z << '\n';
  if (!out) throw StateError("failed writing MV file: " + path);
}

inline void write_mv_file(const std::string& path, const MvMap& map) {
  write_mv_file(path, std::vector<std::pair<Vec3i, IntegerMV>>(map.begin(), map.end()));
}

inline MvMap read_mv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateError("cannot open MV file: " + path);
  MvMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Vec3i key, d;
    if (!(ss >> key.x >> key.y >> key.z >> d.x >> d.y >> d.z))
      throw ParseError("MV file " + path + ": malformed line " + std::to_string(lineno));
    std::string extra;
    if (ss >> extra)
      throw ParseError("MV file " + path + ": trailing tokens on line " + std::to_string(lineno));
    if (!map.emplace(key, IntegerMV(d)).second)
      throw ParseError("MV file " + path + ": duplicate block on line " + std::to_string(lineno));
  }
  return map;
}

}  // namespace pcvc
