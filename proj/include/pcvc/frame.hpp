#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/vec3.hpp"

namespace pcvc {

enum class ColorSpace : uint8_t { RGB, YUV };

struct Voxel {
  Vec3i coord;
  Vec3d attr;
};

// One point-cloud frame: occupied voxels on a [0, 2^depth)^3 grid, sorted
// lexicographically by coordinate, with unique coordinates.
struct Frame {
  std::vector<Voxel> voxels;
  int depth = 0;
  ColorSpace color_space = ColorSpace::RGB;

  size_t size() const { return voxels.size(); }
};

inline int infer_depth(const std::vector<Voxel>& voxels) {
  int32_t maxc = 0;
  for (const auto& v : voxels) maxc = std::max({maxc, v.coord.x, v.coord.y, v.coord.z});
  int d = 0;
  while ((int64_t{1} << d) <= maxc) ++d;
  return d;
}

// Canonicalizes a raw voxel list into a Frame: validates the coordinate
// range, sorts lexicographically, and merges duplicate coordinates by
// averaging their attributes.
inline Frame make_frame(std::vector<Voxel> voxels, int depth = -1,
                        ColorSpace cs = ColorSpace::RGB) {
  for (const auto& v : voxels) {
    if (v.coord.x < 0 || v.coord.y < 0 || v.coord.z < 0)
      throw DomainError("voxel coordinate is negative");
  }
  if (depth < 0) depth = infer_depth(voxels);
  const int64_t lim = int64_t{1} << depth;
  for (const auto& v : voxels) {
    if (v.coord.x >= lim || v.coord.y >= lim || v.coord.z >= lim) {
      std::ostringstream os;
      os << "voxel (" << v.coord.x << "," << v.coord.y << "," << v.coord.z
         << ") outside the depth-" << depth << " grid";
      throw DomainError(os.str());
    }
  }
  std::sort(voxels.begin(), voxels.end(),
            [](const Voxel& a, const Voxel& b) { return a.coord < b.coord; });
  std::vector<Voxel> merged;
  merged.reserve(voxels.size());
  for (size_t i = 0; i < voxels.size();) {
    size_t j = i + 1;
    Vec3d sum = voxels[i].attr;
    while (j < voxels.size() && voxels[j].coord == voxels[i].coord) {
      sum = sum + voxels[j].attr;
      ++j;
    }
    merged.push_back({voxels[i].coord, (1.0 / double(j - i)) * sum});
    i = j;
  }
  return Frame{std::move(merged), depth, cs};
}

// Full-range BT.601 (JPEG-style) color matrix; exactly invertible in real
// arithmetic, chroma offset by 128, no rounding and no clipping.
inline Vec3d rgb_to_yuv_value(Vec3d rgb) {
  const double y = 0.299 * rgb.x + 0.587 * rgb.y + 0.114 * rgb.z;
  const double u = (rgb.z - y) * (0.5 / 0.886) + 128.0;
  const double v = (rgb.x - y) * (0.5 / 0.701) + 128.0;
  return {y, u, v};
}

inline Vec3d yuv_to_rgb_value(Vec3d yuv) {
  const double r = yuv.x + (yuv.z - 128.0) * (0.701 / 0.5);
  const double b = yuv.x + (yuv.y - 128.0) * (0.886 / 0.5);
  const double g = (yuv.x - 0.299 * r - 0.114 * b) / 0.587;
  return {r, g, b};
}

inline Frame rgb_to_yuv(const Frame& frame) {
  if (frame.color_space != ColorSpace::RGB)
    throw StateError("rgb_to_yuv: frame is not in RGB space");
  Frame out = frame;
  out.color_space = ColorSpace::YUV;
  for (auto& v : out.voxels) v.attr = rgb_to_yuv_value(v.attr);
  return out;
}

inline Frame yuv_to_rgb(const Frame& frame) {
  if (frame.color_space != ColorSpace::YUV)
    throw StateError("yuv_to_rgb: frame is not in YUV space");
  Frame out = frame;
  out.color_space = ColorSpace::RGB;
  for (auto& v : out.voxels) v.attr = yuv_to_rgb_value(v.attr);
  return out;
}

// One spatial block of a partitioned frame. Holds indices into the owning
// frame's voxel list, never copies of the voxels.
struct Block {
  Vec3i origin;
  int size = 16;
  std::vector<uint32_t> voxel_indices;
};

// Splits a frame into non-overlapping size^3 blocks keyed by
// floor(coord / size), ordered lexicographically by origin. Empty blocks are
// not materialized.
inline std::vector<Block> partition(const Frame& frame, int block_size) {
  if (block_size < 2 || (block_size & (block_size - 1)) != 0)
    throw DomainError("block size must be a power of two >= 2");
  std::vector<Block> blocks;
  // Voxels are sorted, but lexicographic voxel order does not group whole
  // blocks; bucket by origin, then sort the origins.
  std::vector<std::pair<Vec3i, uint32_t>> keyed(frame.size());
  for (uint32_t i = 0; i < frame.size(); ++i) {
    const Vec3i c = frame.voxels[i].coord;
    keyed[i] = {{c.x / block_size * block_size, c.y / block_size * block_size,
                 c.z / block_size * block_size},
                i};
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 0; i < keyed.size();) {
    size_t j = i;
    Block b;
    b.origin = keyed[i].first;
    b.size = block_size;
    while (j < keyed.size() && keyed[j].first == b.origin) b.voxel_indices.push_back(keyed[j++].second);
    blocks.push_back(std::move(b));
    i = j;
  }
  return blocks;
}

// Extracts one channel (0=Y/R, 1=U/G, 2=V/B) of a block as a dense vector.
inline std::vector<double> block_channel(const Frame& frame, const Block& block, int channel) {
  std::vector<double> s(block.voxel_indices.size());
  for (size_t i = 0; i < s.size(); ++i) s[i] = frame.voxels[block.voxel_indices[i]].attr[channel];
  return s;
}

inline std::vector<Vec3i> block_coords(const Frame& frame, const Block& block) {
  std::vector<Vec3i> c(block.voxel_indices.size());
  for (size_t i = 0; i < c.size(); ++i) c[i] = frame.voxels[block.voxel_indices[i]].coord;
  return c;
}

}  // namespace pcvc
