#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/vec3.hpp"

namespace pcvc {

// Morton (z-order) key, 21 bits per axis.
inline uint64_t morton3(Vec3i c) {
  uint64_t key = 0;
  for (int b = 0; b < 21; ++b) {
    key |= (uint64_t(c.x >> b) & 1u) << (3 * b + 2);
    key |= (uint64_t(c.y >> b) & 1u) << (3 * b + 1);
    key |= (uint64_t(c.z >> b) & 1u) << (3 * b + 0);
  }
  return key;
}

// Region-adaptive hierarchical transform: occupancy-weighted Haar merges,
// one axis at a time (x, then y, then z per level) from the leaves up to a
// single root after `depth` levels. The merge schedule depends on geometry
// only, so the same object replays the transform forward and inverse on both
// encoder and decoder. Coefficient layout: index 0 is the root DC, then
// high-pass coefficients from the root-most merge step down to the leaf
// level, in Morton order of the merged node within each step.
class Raht {
public:
  Raht(std::span<const Vec3i> coords, int depth) : n_(coords.size()) {
    if (depth < 1 || depth > 20) throw DomainError("raht depth out of [1, 20]");
    if (n_ == 0) throw DomainError("raht needs at least one voxel");

    struct Node {
      Vec3i coord;
      double weight;
      uint32_t slot;
    };
    std::vector<Node> nodes(n_);
    for (size_t i = 0; i < n_; ++i) {
      const Vec3i c = coords[i];
      for (int a = 0; a < 3; ++a)
        if (c[a] < 0 || c[a] >= (1 << depth))
          throw DomainError("raht coordinate outside [0, 2^depth)");
      nodes[i] = {c, 1.0, uint32_t(i)};
    }
    {
      std::vector<uint64_t> keys(n_);
      for (size_t i = 0; i < n_; ++i) keys[i] = morton3(coords[i]);
      std::sort(keys.begin(), keys.end());
      if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
        throw DomainError("duplicate coordinate in raht input");
    }

    std::vector<std::vector<uint32_t>> step_ops;  // op indices per merge step
    for (int level = 0; level < depth; ++level)
      for (int axis = 0; axis < 3; ++axis) {
        std::sort(nodes.begin(), nodes.end(), [&](const Node& a, const Node& b) {
          const uint64_t ka = morton3(merged(a.coord, axis));
          const uint64_t kb = morton3(merged(b.coord, axis));
          if (ka != kb) return ka < kb;
          return (a.coord[axis] & 1) < (b.coord[axis] & 1);
        });
        step_ops.emplace_back();
        std::vector<Node> next;
        next.reserve(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) {
          const Vec3i key = merged(nodes[i].coord, axis);
          if (i + 1 < nodes.size() && merged(nodes[i + 1].coord, axis) == key) {
            // Duplicate coordinates would pair a node with itself: the sort
            // puts the even-parity sibling first, so equal parities here mean
            // duplicate input coordinates.
            if ((nodes[i].coord[axis] & 1) == (nodes[i + 1].coord[axis] & 1))
              throw DomainError("duplicate coordinate in raht input");
            step_ops.back().push_back(uint32_t(ops_.size()));
            ops_.push_back({nodes[i].slot, nodes[i + 1].slot, nodes[i].weight, nodes[i + 1].weight});
            next.push_back({key, nodes[i].weight + nodes[i + 1].weight, nodes[i].slot});
            ++i;
          } else {
            next.push_back({key, nodes[i].weight, nodes[i].slot});
          }
        }
        nodes.swap(next);
      }
    if (nodes.size() != 1) throw StateError("raht did not reduce to a single root");
    root_slot_ = nodes[0].slot;

    // Root DC first, then highs from the last (root-most) step backwards.
    out_pos_.resize(ops_.size());
    uint32_t pos = 1;
    for (auto it = step_ops.rbegin(); it != step_ops.rend(); ++it)
      for (uint32_t op : *it) out_pos_[op] = pos++;
  }

  size_t size() const { return n_; }

  std::vector<double> forward(std::span<const double> values) const {
    if (values.size() != n_) throw DomainError("raht forward: value count mismatch");
    std::vector<double> v(values.begin(), values.end());
    for (const Op& op : ops_) {
      const double sa = std::sqrt(op.wa), sb = std::sqrt(op.wb), sw = std::sqrt(op.wa + op.wb);
      const double a = v[op.lo_slot], b = v[op.hi_slot];
      v[op.lo_slot] = (sa * a + sb * b) / sw;
      v[op.hi_slot] = (sb * a - sa * b) / sw;
    }
    std::vector<double> out(n_);
    out[0] = v[root_slot_];
    for (size_t k = 0; k < ops_.size(); ++k) out[out_pos_[k]] = v[ops_[k].hi_slot];
    return out;
  }

  std::vector<double> inverse(std::span<const double> coeffs) const {
    if (coeffs.size() != n_) throw DomainError("raht inverse: coefficient count mismatch");
    std::vector<double> v(n_, 0.0);
    v[root_slot_] = coeffs[0];
    for (size_t k = 0; k < ops_.size(); ++k) v[ops_[k].hi_slot] = coeffs[out_pos_[k]];
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
      const double sa = std::sqrt(it->wa), sb = std::sqrt(it->wb), sw = std::sqrt(it->wa + it->wb);
      const double low = v[it->lo_slot], high = v[it->hi_slot];
      v[it->lo_slot] = (sa * low + sb * high) / sw;
      v[it->hi_slot] = (sb * low - sa * high) / sw;
    }
    return v;
  }

private:
  struct Op {
    uint32_t lo_slot, hi_slot;
    double wa, wb;
  };

  static Vec3i merged(Vec3i c, int axis) {
    Vec3i m = c;
    if (axis == 0) m.x >>= 1;
    if (axis == 1) m.y >>= 1;
    if (axis == 2) m.z >>= 1;
    return m;
  }

  size_t n_;
  uint32_t root_slot_ = 0;
  std::vector<Op> ops_;
  std::vector<uint32_t> out_pos_;
};

inline std::vector<double> raht_forward(std::span<const Vec3i> coords, int depth,
                                        std::span<const double> values) {
  return Raht(coords, depth).forward(values);
}

inline std::vector<double> raht_inverse(std::span<const Vec3i> coords, int depth,
                                        std::span<const double> coeffs) {
  return Raht(coords, depth).inverse(coeffs);
}

}  // namespace pcvc
