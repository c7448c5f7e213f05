#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>

namespace pcvc {

// Integer lattice coordinate / displacement.
struct Vec3i {
  int32_t x = 0, y = 0, z = 0;

  friend constexpr Vec3i operator+(Vec3i a, Vec3i b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3i operator-(Vec3i a, Vec3i b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3i operator*(int32_t s, Vec3i a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr Vec3i operator*(Vec3i a, int32_t s) { return s * a; }
  constexpr int32_t operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr int32_t& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  // Lexicographic (x, y, z); the canonical voxel ordering everywhere.
  friend constexpr auto operator<=>(const Vec3i&, const Vec3i&) = default;

  constexpr int64_t norm2() const {
    return int64_t{x} * x + int64_t{y} * y + int64_t{z} * z;
  }
  double norm() const { return std::sqrt(double(norm2())); }
};

// Real-valued triple: color attributes (one value per channel) or
// fractional displacements.
struct Vec3d {
  double x = 0, y = 0, z = 0;

  friend constexpr Vec3d operator+(Vec3d a, Vec3d b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3d operator-(Vec3d a, Vec3d b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3d operator*(double s, Vec3d a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr Vec3d operator*(Vec3d a, double s) { return s * a; }
  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  friend constexpr bool operator==(const Vec3d&, const Vec3d&) = default;

  constexpr double norm2() const { return x * x + y * y + z * z; }
};

inline int64_t dist2(Vec3i a, Vec3i b) { return (a - b).norm2(); }

// Packs a (possibly negative, |c| < 2^20) lattice coordinate into one key.
constexpr int64_t pack_coord(Vec3i c) {
  constexpr int64_t kBias = int64_t{1} << 20;
  return (((int64_t{c.x} + kBias) << 42) | ((int64_t{c.y} + kBias) << 21) | (int64_t{c.z} + kBias));
}

}  // namespace pcvc

template <>
struct std::hash<pcvc::Vec3i> {
  size_t operator()(const pcvc::Vec3i& v) const noexcept {
    return std::hash<int64_t>{}(pcvc::pack_coord(v));
  }
};
