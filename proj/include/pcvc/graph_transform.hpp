#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_set>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"
#include "pcvc/vec3.hpp"

namespace pcvc {

struct GraphEdge {
  uint32_t i = 0, j = 0;  // i < j
  double weight = 0.0;
};

enum class Connectivity { threshold, complete };

struct BlockGraph {
  uint32_t n = 0;
  std::vector<GraphEdge> edges;
  Connectivity connectivity = Connectivity::threshold;
};

// Similarity graph over one block's voxels: edges join voxels within
// Euclidean distance sqrt(3) with weight 1/distance. If that graph is
// disconnected the block falls back to the complete graph (all pairs,
// 1/distance), keeping a single DC subspace per block.
inline BlockGraph build_block_graph(std::span<const Vec3i> coords) {
  const uint32_t n = uint32_t(coords.size());
  if (n == 0) throw DomainError("block graph needs at least one voxel");
  {
    std::unordered_set<int64_t> seen;
    seen.reserve(n * 2);
    for (const Vec3i& c : coords)
      if (!seen.insert(pack_coord(c)).second)
        throw DomainError("duplicate coordinate in block");
  }

  BlockGraph g;
  g.n = n;
  std::vector<uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = i + 1; j < n; ++j) {
      const int64_t d2 = dist2(coords[i], coords[j]);
      if (d2 <= 3) {
        g.edges.push_back({i, j, 1.0 / std::sqrt(double(d2))});
        parent[find(i)] = find(j);
      }
    }

  uint32_t components = 0;
  for (uint32_t i = 0; i < n; ++i)
    if (find(i) == i) ++components;
  if (components > 1) {
    g.connectivity = Connectivity::complete;
    g.edges.clear();
    for (uint32_t i = 0; i < n; ++i)
      for (uint32_t j = i + 1; j < n; ++j)
        g.edges.push_back({i, j, 1.0 / std::sqrt(double(dist2(coords[i], coords[j])))});
  }
  return g;
}

// Graph Fourier transform basis: eigenvectors of the combinatorial Laplacian
// L = D - W in ascending eigenvalue order (column 0 is DC). Each eigenvector
// is sign-normalized so its first non-negligible entry is positive, making
// the basis deterministic.
class Gft {
public:
  explicit Gft(const BlockGraph& g) {
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const GraphEdge& e : g.edges) {
      lap(e.i, e.j) -= e.weight;
      lap(e.j, e.i) -= e.weight;
      lap(e.i, e.i) += e.weight;
      lap(e.j, e.j) += e.weight;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success) throw StateError("Laplacian eigendecomposition failed");
    basis_ = solver.eigenvectors();
    for (Eigen::Index c = 0; c < basis_.cols(); ++c)
      for (Eigen::Index r = 0; r < basis_.rows(); ++r)
        if (std::abs(basis_(r, c)) > 1e-12) {
          if (basis_(r, c) < 0) basis_.col(c) = -basis_.col(c);
          break;
        }
  }

  uint32_t size() const { return uint32_t(basis_.rows()); }

  std::vector<double> forward(std::span<const double> values) const {
    if (values.size() != size_t(basis_.rows()))
      throw DomainError("gft forward: value count does not match basis");
    Eigen::Map<const Eigen::VectorXd> x(values.data(), basis_.rows());
    Eigen::VectorXd y = basis_.transpose() * x;
    return {y.data(), y.data() + y.size()};
  }

  std::vector<double> inverse(std::span<const double> coeffs) const {
    if (coeffs.size() != size_t(basis_.rows()))
      throw DomainError("gft inverse: coefficient count does not match basis");
    Eigen::Map<const Eigen::VectorXd> y(coeffs.data(), basis_.rows());
    Eigen::VectorXd x = basis_ * y;
    return {x.data(), x.data() + x.size()};
  }

private:
  Eigen::MatrixXd basis_;
};

// Per-channel coefficient layout of one frame: one DC per block (frame block
// order) plus each block's AC coefficients in ascending frequency.
struct CoefficientPlan {
  std::vector<double> dc;
  std::vector<std::vector<double>> ac;
};

// Single-level region-adaptive GFT over a partitioned frame. The per-block
// bases depend on geometry only, so encoder and decoder construct identical
// transforms from the shared block layout; one instance serves all three
// channels plus the reconstruction pass.
class Ragft1 {
public:
  Ragft1(const Frame& frame, const std::vector<Block>& blocks) : blocks_(blocks) {
    gfts_.reserve(blocks.size());
    for (const Block& b : blocks) {
      const auto coords = block_coords(frame, b);
      gfts_.emplace_back(build_block_graph(coords));
    }
  }

  // values: one sample per frame voxel, indexed like Frame::voxels.
  CoefficientPlan forward(std::span<const double> values) const {
    CoefficientPlan plan;
    plan.dc.reserve(blocks_.size());
    plan.ac.reserve(blocks_.size());
    std::vector<double> x;
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
      const Block& b = blocks_[bi];
      x.resize(b.voxel_indices.size());
      for (size_t k = 0; k < b.voxel_indices.size(); ++k) x[k] = values[b.voxel_indices[k]];
      std::vector<double> y = gfts_[bi].forward(x);
      plan.dc.push_back(y[0]);
      plan.ac.emplace_back(y.begin() + 1, y.end());
    }
    return plan;
  }

  std::vector<double> inverse(const CoefficientPlan& plan, size_t frame_voxel_count) const {
    if (plan.dc.size() != blocks_.size() || plan.ac.size() != blocks_.size())
      throw DomainError("coefficient plan does not match block layout");
    std::vector<double> values(frame_voxel_count, 0.0);
    std::vector<double> y;
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
      const Block& b = blocks_[bi];
      if (plan.ac[bi].size() + 1 != b.voxel_indices.size())
        throw DomainError("coefficient plan does not match block sizes");
      y.assign(1, plan.dc[bi]);
      y.insert(y.end(), plan.ac[bi].begin(), plan.ac[bi].end());
      const std::vector<double> x = gfts_[bi].inverse(y);
      for (size_t k = 0; k < b.voxel_indices.size(); ++k) values[b.voxel_indices[k]] = x[k];
    }
    return values;
  }

private:
  std::vector<Block> blocks_;
  std::vector<Gft> gfts_;
};

}  // namespace pcvc
