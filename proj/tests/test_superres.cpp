// Half-voxel super-resolution: pair finding, midpoint interpolation, merging.

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <vector>

#include "pcvc/superres.hpp"

namespace {

using namespace pcvc;

Frame yuv_frame(std::vector<Voxel> voxels, int depth = -1) {
  return make_frame(std::move(voxels), depth, ColorSpace::YUV);
}

const double kRho = 1.7320508075688772;  // sqrt(3)

TEST(NeighborPairs, RadiusIsInclusiveAtSqrt3) {
  // Two voxels exactly sqrt(3) apart must pair despite sqrt(3)^2 rounding
  // below 3 in double arithmetic.
  Frame f = yuv_frame({{{0, 0, 0}, {1, 1, 1}}, {{1, 1, 1}, {2, 2, 2}}});
  const auto pairs = neighbor_pairs(f, kRho);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (std::pair<uint32_t, uint32_t>{0, 1}));

  // Distance 2 along an axis is outside rho = sqrt(3).
  Frame g = yuv_frame({{{0, 0, 0}, {}}, {{2, 0, 0}, {}}});
  EXPECT_TRUE(neighbor_pairs(g, kRho).empty());
}

TEST(NeighborPairs, UnitCubeHasAllTwentyEightPairs) {
  // All 8 corners of the unit cube are pairwise within sqrt(3):
  // 12 edges, 12 face diagonals, 4 body diagonals = C(8,2) = 28.
  std::vector<Voxel> vs;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) vs.push_back({{x, y, z}, {}});
  const auto pairs = neighbor_pairs(yuv_frame(std::move(vs)), kRho);
  EXPECT_EQ(pairs.size(), 28u);
}

TEST(NeighborPairs, PairsAreSortedUniqueAndOrdered) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> c(0, 9);
  std::vector<Voxel> vs;
  for (int i = 0; i < 120; ++i) vs.push_back({{c(rng), c(rng), c(rng)}, {}});
  Frame f = yuv_frame(std::move(vs), 4);
  const auto pairs = neighbor_pairs(f, kRho);
  for (size_t k = 0; k < pairs.size(); ++k) {
    EXPECT_LT(pairs[k].first, pairs[k].second);
    if (k) EXPECT_LT(pairs[k - 1], pairs[k]);
    const int64_t d2 = dist2(f.voxels[pairs[k].first].coord, f.voxels[pairs[k].second].coord);
    EXPECT_LE(d2, 3);
  }
}

TEST(NeighborPairs, RejectsNonPositiveRadius) {
  Frame f = yuv_frame({{{0, 0, 0}, {}}});
  EXPECT_THROW(neighbor_pairs(f, 0.0), DomainError);
  EXPECT_THROW(neighbor_pairs(f, -1.0), DomainError);
}

TEST(Superresolve, RequiresYuvInput) {
  Frame f = make_frame({{{0, 0, 0}, {1, 2, 3}}});  // RGB
  EXPECT_THROW(superresolve(f, kRho), StateError);
}

TEST(Superresolve, MidpointCarriesPairAverage) {
  Frame f = yuv_frame({{{0, 0, 0}, {100, 60, 200}}, {{1, 0, 0}, {200, 80, 100}}});
  const SuperCloud sc = superresolve(f, kRho);
  ASSERT_EQ(sc.voxels.size(), 3u);
  EXPECT_EQ(sc.voxels[0].coord2x, (Vec3i{0, 0, 0}));
  EXPECT_FALSE(sc.voxels[0].fractional);
  EXPECT_EQ(sc.voxels[1].coord2x, (Vec3i{1, 0, 0}));
  EXPECT_TRUE(sc.voxels[1].fractional);
  EXPECT_EQ(sc.voxels[1].attr, (Vec3d{150, 70, 150}));
  EXPECT_EQ(sc.voxels[2].coord2x, (Vec3i{2, 0, 0}));
}

TEST(Superresolve, CoincidentMidpointsMergeByAveragingPairAverages) {
  // Pairs (0,0,0)-(1,1,0) and (1,0,0)-(0,1,0) share midpoint (1,1,0) on the
  // doubled grid. Its attribute is the average of the two pair averages.
  Frame f = yuv_frame({{{0, 0, 0}, {10, 0, 0}},
                       {{0, 1, 0}, {30, 0, 0}},
                       {{1, 0, 0}, {50, 0, 0}},
                       {{1, 1, 0}, {90, 0, 0}}});
  const SuperCloud sc = superresolve(f, kRho);
  double found = -1;
  for (const SuperVoxel& v : sc.voxels)
    if (v.coord2x == Vec3i{1, 1, 0}) found = v.attr.x;
  // Pair averages: (10+90)/2 = 50 and (30+50)/2 = 40; merged: 45.
  EXPECT_DOUBLE_EQ(found, 45.0);
}

TEST(Superresolve, IntegerLatticeMidpointsAreDropped) {
  // rho = 2 pairs voxels two apart; their midpoint lands back on the integer
  // lattice (all-even doubled coordinate) and must not appear.
  Frame f = yuv_frame({{{0, 0, 0}, {10, 10, 10}}, {{2, 0, 0}, {30, 30, 30}}});
  const SuperCloud sc = superresolve(f, 2.0);
  ASSERT_EQ(sc.voxels.size(), 2u);
  for (const SuperVoxel& v : sc.voxels) EXPECT_FALSE(v.fractional);
}

// Independent all-pairs oracle. Pair discovery is a plain O(n^2) scan (the
// library uses a hash grid); the merge arithmetic follows the same
// accumulation order over sorted pairs, so comparisons can be exact.
SuperCloud brute_superresolve(const Frame& frame, double rho) {
  const double r2 = rho * rho + 1e-9;
  SuperCloud out;
  out.source_depth = frame.depth;
  for (const Voxel& v : frame.voxels) out.voxels.push_back({v.coord * 2, v.attr, false});
  std::map<Vec3i, std::pair<Vec3d, int>> mids;  // ordered map: order irrelevant to sums
  for (uint32_t i = 0; i < frame.voxels.size(); ++i)
    for (uint32_t j = i + 1; j < frame.voxels.size(); ++j) {
      const Voxel& a = frame.voxels[i];
      const Voxel& b = frame.voxels[j];
      if (double(dist2(a.coord, b.coord)) > r2) continue;
      auto& [sum, n] = mids[a.coord + b.coord];
      sum = sum + (a.attr + b.attr) * 0.5;
      n += 1;
    }
  for (const auto& [c2, acc] : mids) {
    if (c2.x % 2 == 0 && c2.y % 2 == 0 && c2.z % 2 == 0) continue;
    out.voxels.push_back({c2, acc.first * (1.0 / acc.second), true});
  }
  std::sort(out.voxels.begin(), out.voxels.end(),
            [](const SuperVoxel& a, const SuperVoxel& b) { return a.coord2x < b.coord2x; });
  return out;
}

TEST(Superresolve, MatchesBruteForceOracleExactly) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> c(0, 11);
  std::uniform_real_distribution<double> a(0.0, 255.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Voxel> vs;
    for (int i = 0; i < 100; ++i)
      vs.push_back({{c(rng), c(rng), c(rng)}, {a(rng), a(rng), a(rng)}});
    Frame f = yuv_frame(std::move(vs), 4);
    const SuperCloud got = superresolve(f, kRho);
    const SuperCloud want = brute_superresolve(f, kRho);
    ASSERT_EQ(got.voxels.size(), want.voxels.size());
    for (size_t i = 0; i < got.voxels.size(); ++i) {
      EXPECT_EQ(got.voxels[i].coord2x, want.voxels[i].coord2x);
      EXPECT_EQ(got.voxels[i].attr, want.voxels[i].attr);  // exact, no tolerance
      EXPECT_EQ(got.voxels[i].fractional, want.voxels[i].fractional);
    }
  }
}

TEST(Superresolve, OutputIsSortedContainsSourcesAndStaysInRange) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> c(0, 15);
  std::uniform_real_distribution<double> a(10.0, 240.0);
  std::vector<Voxel> vs;
  for (int i = 0; i < 200; ++i)
    vs.push_back({{c(rng), c(rng), c(rng)}, {a(rng), a(rng), a(rng)}});
  Frame f = yuv_frame(std::move(vs), 4);
  const SuperCloud sc = superresolve(f, kRho);

  // Sorted, unique coordinates.
  for (size_t i = 1; i < sc.voxels.size(); ++i)
    EXPECT_LT(sc.voxels[i - 1].coord2x, sc.voxels[i].coord2x);

  // Every source voxel appears doubled, with its attribute untouched.
  size_t integer_count = 0;
  std::map<Vec3i, Vec3d> by_coord;
  for (const SuperVoxel& v : sc.voxels) {
    by_coord[v.coord2x] = v.attr;
    if (!v.fractional) ++integer_count;
  }
  EXPECT_EQ(integer_count, f.size());
  double lo = 255, hi = 0;
  for (const Voxel& v : f.voxels) {
    ASSERT_TRUE(by_coord.count(v.coord * 2));
    EXPECT_EQ(by_coord[v.coord * 2], v.attr);
    lo = std::min({lo, v.attr.x, v.attr.y, v.attr.z});
    hi = std::max({hi, v.attr.x, v.attr.y, v.attr.z});
  }

  // Interpolated attributes are averages, so they cannot escape the source
  // range, and fractional coordinates always carry an odd component.
  for (const SuperVoxel& v : sc.voxels) {
    for (int ch = 0; ch < 3; ++ch) {
      EXPECT_GE(v.attr[ch], lo - 1e-12);
      EXPECT_LE(v.attr[ch], hi + 1e-12);
    }
    const bool odd = (v.coord2x.x % 2) || (v.coord2x.y % 2) || (v.coord2x.z % 2);
    EXPECT_EQ(odd, v.fractional);
  }
}

TEST(Superresolve, DeterministicAcrossRuns) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> c(0, 12);
  std::uniform_real_distribution<double> a(0.0, 255.0);
  std::vector<Voxel> vs;
  for (int i = 0; i < 150; ++i)
    vs.push_back({{c(rng), c(rng), c(rng)}, {a(rng), a(rng), a(rng)}});
  Frame f = yuv_frame(std::move(vs), 4);
  const SuperCloud s1 = superresolve(f, kRho);
  const SuperCloud s2 = superresolve(f, kRho);
  ASSERT_EQ(s1.voxels.size(), s2.voxels.size());
  for (size_t i = 0; i < s1.voxels.size(); ++i) {
    EXPECT_EQ(s1.voxels[i].coord2x, s2.voxels[i].coord2x);
    EXPECT_EQ(s1.voxels[i].attr, s2.voxels[i].attr);
  }
}

TEST(Superresolve, TinyRadiusKeepsOnlySources) {
  Frame f = yuv_frame({{{0, 0, 0}, {1, 2, 3}}, {{1, 0, 0}, {4, 5, 6}}});
  const SuperCloud sc = superresolve(f, 0.5);
  EXPECT_EQ(sc.voxels.size(), 2u);
}

TEST(SupercloudInBox, SlicesHalfOpenRanges) {
  Frame f = yuv_frame({{{0, 0, 0}, {}}, {{1, 0, 0}, {}}, {{2, 0, 0}, {}}});
  const SuperCloud sc = superresolve(f, 1.0);  // adds midpoints (1,0,0), (3,0,0)
  ASSERT_EQ(sc.voxels.size(), 5u);             // doubled 0,2,4 plus 1,3
  const auto all = supercloud_in_box(sc, {0, 0, 0}, {5, 1, 1});
  EXPECT_EQ(all.size(), 5u);
  const auto some = supercloud_in_box(sc, {1, 0, 0}, {4, 1, 1});
  ASSERT_EQ(some.size(), 3u);
  EXPECT_EQ(sc.voxels[some[0]].coord2x, (Vec3i{1, 0, 0}));
  EXPECT_EQ(sc.voxels[some[2]].coord2x, (Vec3i{3, 0, 0}));
  EXPECT_TRUE(supercloud_in_box(sc, {5, 0, 0}, {9, 1, 1}).empty());
}

}  // namespace
