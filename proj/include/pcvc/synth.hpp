#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"

namespace pcvc {

enum class SynthKind { translating_texture_plane, rotating_shell, half_voxel_shift };

inline SynthKind synth_kind_from_name(const std::string& name) {
  if (name == "translating-texture-plane") return SynthKind::translating_texture_plane;
  if (name == "rotating-shell") return SynthKind::rotating_shell;
  if (name == "half-voxel-shift") return SynthKind::half_voxel_shift;
  throw DomainError("unknown synthetic sequence kind: " + name);
}

namespace synth_detail {

inline constexpr double kPi = 3.14159265358979323846;

inline int grid_depth(int grid) {
  if (grid < 16 || grid > 1024 || (grid & (grid - 1)))
    throw DomainError("synthetic grid must be a power of two in [16, 1024]");
  int d = 0;
  while ((1 << d) < grid) ++d;
  return d;
}

inline Vec3d round_rgb(double r, double g, double b) {
  auto rnd = [](double v) { return double(std::llround(std::min(255.0, std::max(0.0, v)))); };
  return {rnd(r), rnd(g), rnd(b)};
}

// Gray level to a mildly tinted RGB triple; keeps the luma pattern while
// giving the chroma planes small but nonzero content.
inline Vec3d tinted(double v) {
  return round_rgb(128.0 + 0.95 * (v - 128.0), v, 128.0 + 1.10 * (v - 128.0));
}

// Rippled height field translating along -x by one voxel per frame: the
// material coordinate of column x at time t is u = x + t, so ivme_search
// recovers d = (1,0,0) exactly away from the trailing edge.
inline std::vector<Frame> translating_texture_plane(int frames, int grid, uint64_t seed) {
  const int depth = grid_depth(grid);
  std::mt19937_64 rng(seed * 2654435761u + 1);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng), p4 = phase(rng);
  const int z0 = grid / 2;
  const int x_lo = 4, x_hi = grid - 4;
  const int y_lo = 4, y_hi = grid - 4;

  std::vector<Frame> out;
  for (int t = 0; t < frames; ++t) {
    std::vector<Voxel> voxels;
    voxels.reserve(size_t(x_hi - x_lo) * (y_hi - y_lo));
    for (int x = x_lo; x < x_hi; ++x)
      for (int y = y_lo; y < y_hi; ++y) {
        const double u = double(x + t);
        const int z = z0 + int(std::llround(2.0 * std::sin(2.0 * kPi * u / 32.0 + p1) +
                                            1.5 * std::cos(2.0 * kPi * y / 24.0 + p2)));
        const double v = 128.0 + 60.0 * std::sin(2.0 * kPi * u / 20.0 + p3) *
                                     std::cos(2.0 * kPi * y / 28.0 + p4);
        voxels.push_back({{x, y, z}, tinted(std::llround(v))});
      }
    out.push_back(make_frame(std::move(voxels), depth, ColorSpace::RGB));
  }
  return out;
}

// Raised-cosine window: 0 outside [lo, hi], 1 on the inner plateau, cosine
// ramps of width `taper` at both ends.
inline double band_window(double u, double lo, double hi, double taper) {
  if (u <= lo || u >= hi) return 0.0;
  if (u < lo + taper) return 0.5 - 0.5 * std::cos(kPi * (u - lo) / taper);
  if (u > hi - taper) return 0.5 - 0.5 * std::cos(kPi * (hi - u) / taper);
  return 1.0;
}

// Stack of three 45-degree ramps x = z + k(t) + 3j translating along x by
// half a voxel per frame: the voxelization x = z + round(1/4 + t/2) + 3j
// alternates between two lattice diagonals while the texture advances, so
// the true displacement is (1/2, 0, 0) and only a half-voxel search can
// align the texture exactly. Along every (y, z) ray the occupied x values
// of consecutive frames are disjoint and interleaved. The sheets sit 3
// voxels apart so they never pair during super-resolution; three sheets
// give blocks a realistic voxel occupancy.
inline std::vector<Frame> half_voxel_shift(int frames, int grid, uint64_t seed) {
  const int depth = grid_depth(grid);
  std::mt19937_64 rng(seed * 2654435761u + 2);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double p1 = phase(rng);
  const int z_lo = 8, z_hi = grid - 12;
  const int y_lo = 8, y_hi = grid - 8;
  // Texture fades out before the strip ends so the last ramp voxel, whose
  // half-step midpoint has no partner, carries no signal; the taper shrinks
  // on small grids to keep a nonzero band.
  const double band_lo = z_lo + 2.0, band_hi = z_hi - 2.0;
  const double taper = std::min(6.0, (band_hi - band_lo) / 2.0);
  const double lambda = 24.0, amp = 80.0;
  const int sheets = 3, spacing = 3;

  std::vector<Frame> out;
  for (int t = 0; t < frames; ++t) {
    const int k = int(std::llround(0.25 + 0.5 * t));
    std::vector<Voxel> voxels;
    voxels.reserve(size_t(z_hi - z_lo) * (y_hi - y_lo) * sheets);
    for (int z = z_lo; z < z_hi; ++z)
      for (int y = y_lo; y < y_hi; ++y)
        for (int j = 0; j < sheets; ++j) {
          const double u = z + 0.5 * t;  // material coordinate along the ramp
          const double wave = std::sin(2.0 * kPi * (u - band_lo) / lambda + p1 + 2.1 * j) *
                              (0.85 + 0.15 * std::cos(2.0 * kPi * y / 16.0));
          const double v = 128.0 + amp * band_window(u, band_lo, band_hi, taper) * wave;
          voxels.push_back({{z + k + spacing * j, y, z}, tinted(std::llround(v))});
        }
    out.push_back(make_frame(std::move(voxels), depth, ColorSpace::RGB));
  }
  return out;
}

// Spherical shell with an angular color texture, rotating about z; motion is
// a rotation so integer search is only approximately right, giving the
// codecs moderately hard content.
inline std::vector<Frame> rotating_shell(int frames, int grid, uint64_t seed) {
  const int depth = grid_depth(grid);
  std::mt19937_64 rng(seed * 2654435761u + 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double p1 = phase(rng), p2 = phase(rng);
  const double omega = 0.06;  // radians per frame
  const double radius = 0.35 * grid;
  const double c = grid / 2.0;
  const int n_dirs = int(std::ceil(4.0 * kPi * radius * radius * 2.5));

  std::vector<Frame> out;
  for (int t = 0; t < frames; ++t) {
    const double theta = omega * t;
    const double ct = std::cos(theta), st = std::sin(theta);
    struct Acc {
      Vec3d sum{0, 0, 0};
      int n = 0;
    };
    std::unordered_map<Vec3i, Acc> cells;
    cells.reserve(size_t(n_dirs));
    // Golden-spiral directions; material angles index the texture so the
    // pattern rotates rigidly with the shell.
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_dirs; ++i) {
      const double zdir = 1.0 - 2.0 * (i + 0.5) / n_dirs;
      const double rxy = std::sqrt(std::max(0.0, 1.0 - zdir * zdir));
      const double ang = golden * i;
      const double mx = rxy * std::cos(ang), my = rxy * std::sin(ang);
      const double gray =
          128.0 + 70.0 * std::sin(3.0 * std::atan2(my, mx) + p1) * std::cos(2.0 * std::asin(zdir) + p2);
      const double wx = ct * mx - st * my, wy = st * mx + ct * my;
      const Vec3i cell{int(std::llround(c + radius * wx)), int(std::llround(c + radius * wy)),
                       int(std::llround(c + radius * zdir))};
      Acc& a = cells[cell];
      a.sum = a.sum + tinted(gray);
      a.n += 1;
    }
    std::vector<Voxel> voxels;
    voxels.reserve(cells.size());
    for (const auto& [cell, acc] : cells) {
      const Vec3d m = acc.sum * (1.0 / acc.n);
      voxels.push_back({cell, {double(std::llround(m.x)), double(std::llround(m.y)),
                               double(std::llround(m.z))}});
    }
    out.push_back(make_frame(std::move(voxels), depth, ColorSpace::RGB));
  }
  return out;
}

}  // namespace synth_detail

inline std::vector<Frame> synth_sequence(SynthKind kind, int frames, int grid,
                                         uint64_t seed = 1) {
  if (frames < 1) throw DomainError("synthetic sequence needs at least one frame");
  switch (kind) {
    case SynthKind::translating_texture_plane:
      return synth_detail::translating_texture_plane(frames, grid, seed);
    case SynthKind::rotating_shell:
      return synth_detail::rotating_shell(frames, grid, seed);
    case SynthKind::half_voxel_shift:
      return synth_detail::half_voxel_shift(frames, grid, seed);
  }
  throw DomainError("unknown synthetic sequence kind");
}

}  // namespace pcvc
