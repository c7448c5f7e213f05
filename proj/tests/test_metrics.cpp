// Quality and rate metrics, synthetic sequences, and the RD sweep harness.

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "pcvc/metrics.hpp"
#include "pcvc/motion.hpp"
#include "pcvc/sweep.hpp"
#include "pcvc/synth.hpp"

namespace {

using namespace pcvc;

Frame flat_frame(const std::vector<double>& y_values, double u = 0.0, double v = 0.0) {
  std::vector<Voxel> vs;
  for (size_t i = 0; i < y_values.size(); ++i)
    vs.push_back({{int(i), 0, 0}, {y_values[i], u, v}});
  return make_frame(std::move(vs), 6, ColorSpace::YUV);
}

// Shifts the Y channel so that the frame's MSE against `base` is exactly the
// sum of the per-voxel squared offsets divided by the count.
Frame offset_y(const Frame& base, const std::vector<double>& diffs) {
  Frame f = base;
  for (size_t i = 0; i < diffs.size(); ++i) f.voxels[i].attr.x += diffs[i];
  return f;
}

TEST(Psnr, ExactReconstructionIsTheInfinitySentinel) {
  const std::vector<Frame> a = {flat_frame({10, 20, 30, 40})};
  EXPECT_EQ(psnr_y(a, a), std::numeric_limits<double>::infinity());
}

TEST(Psnr, FullScaleErrorIsZeroDb) {
  const std::vector<Frame> a = {flat_frame({0, 0, 0, 0})};
  const std::vector<Frame> b = {offset_y(a[0], {255, 255, 255, 255})};
  EXPECT_NEAR(psnr_y(a, b), 0.0, 1e-12);
}

TEST(Psnr, AveragesPerFrameMseInsideTheLog) {
  const Frame base = flat_frame({100, 100, 100, 100});
  // Per-frame MSEs 1 and 3: -10*log10(((1+3)/2)/255^2) = 45.1205 dB.
  const std::vector<Frame> orig = {base, base};
  const std::vector<Frame> recon = {offset_y(base, {1, 1, -1, -1}),
                                    offset_y(base, {0, 2, -2, 2})};
  EXPECT_NEAR(psnr_y(orig, recon), -10.0 * std::log10(2.0 / (255.0 * 255.0)), 1e-12);
  EXPECT_NEAR(psnr_y(orig, recon), 45.1205, 1e-3);

  // Per-frame MSEs 0.5 and 1.5 average to 1: the 48.13 dB fixture.
  const std::vector<Frame> recon2 = {offset_y(base, {1, 1, 0, 0}),
                                     offset_y(base, {2, 1, -1, 0})};
  EXPECT_NEAR(psnr_y(orig, recon2), 48.13, 0.01);
}

TEST(Psnr, MatchesANaiveOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> val(0.0, 255.0);
  std::uniform_real_distribution<double> noise(-4.0, 4.0);
  for (int channel = 0; channel < 3; ++channel) {
    std::vector<Frame> orig, recon;
    for (int t = 0; t < 3; ++t) {
      std::vector<double> y(17 + 5 * t);
      for (double& s : y) s = val(rng);
      Frame base = flat_frame(y, val(rng), val(rng));
      Frame noisy = base;
      for (Voxel& v : noisy.voxels) v.attr[channel] += noise(rng);
      orig.push_back(base);
      recon.push_back(noisy);
    }
    double acc = 0.0;
    for (size_t t = 0; t < orig.size(); ++t) {
      double sse = 0.0;
      for (size_t i = 0; i < orig[t].voxels.size(); ++i) {
        const double d = orig[t].voxels[i].attr[channel] - recon[t].voxels[i].attr[channel];
        sse += d * d;
      }
      acc += sse / (255.0 * 255.0 * double(orig[t].voxels.size()));
    }
    const double want = -10.0 * std::log10(acc / double(orig.size()));
    EXPECT_NEAR(psnr_channel(orig, recon, channel), want, 1e-9);
  }
}

TEST(Psnr, RejectsMismatchedInput) {
  const std::vector<Frame> a = {flat_frame({1, 2, 3})};
  EXPECT_THROW(psnr_y(a, std::vector<Frame>{}), DomainError);
  EXPECT_THROW(psnr_channel(a, a, 3), DomainError);

  std::vector<Voxel> moved = a[0].voxels;
  moved[0].coord.z += 1;
  const std::vector<Frame> b = {make_frame(std::move(moved), 6, ColorSpace::YUV)};
  EXPECT_THROW(psnr_y(a, b), DomainError);

  std::vector<Voxel> rgb = a[0].voxels;
  const std::vector<Frame> c = {make_frame(std::move(rgb), 6, ColorSpace::RGB)};
  EXPECT_THROW(psnr_y(a, c), StateError);
}

TEST(Bpv, PoolsBitsOverVoxels) {
  const std::vector<size_t> one_bits = {100}, one_voxels = {100};
  EXPECT_DOUBLE_EQ(bpv(one_bits, one_voxels), 1.0);
  const std::vector<size_t> bits = {100, 300}, voxels = {100, 100};
  EXPECT_DOUBLE_EQ(bpv(bits, voxels), 2.0);  // pooled, not per-frame averaged
}

TEST(Bpv, IsPermutationInvariant) {
  std::mt19937_64 rng(37);
  std::vector<size_t> bits(10), voxels(10);
  for (size_t i = 0; i < bits.size(); ++i) {
    bits[i] = 100 + rng() % 10000;
    voxels[i] = 50 + rng() % 500;
  }
  const double before = bpv(bits, voxels);
  std::vector<size_t> pbits = bits, pvoxels = voxels;
  std::mt19937_64 perm(41);
  for (size_t i = pbits.size(); i > 1; --i) {
    const size_t j = perm() % i;
    std::swap(pbits[i - 1], pbits[j]);
    std::swap(pvoxels[i - 1], pvoxels[j]);
  }
  EXPECT_DOUBLE_EQ(bpv(pbits, pvoxels), before);
}

TEST(Bpv, RejectsDegenerateInput) {
  const std::vector<size_t> bits = {100}, voxels = {0};
  EXPECT_THROW(bpv(bits, voxels), DomainError);
  EXPECT_THROW(bpv(std::vector<size_t>{}, std::vector<size_t>{}), DomainError);
  const std::vector<size_t> two = {1, 2};
  EXPECT_THROW(bpv(two, voxels), DomainError);
}

const std::vector<RDPoint>& anchor_curve() {
  static const std::vector<RDPoint> pts = {
      {0.4, 30.0}, {0.8, 34.0}, {1.6, 39.0}, {3.2, 45.0}};
  return pts;
}

TEST(BdRate, IdenticalCurvesScoreZero) {
  EXPECT_NEAR(bd_rate(anchor_curve(), anchor_curve()), 0.0, 1e-9);
}

TEST(BdRate, UniformRateDoublingIsPlusHundredPercent) {
  std::vector<RDPoint> doubled = anchor_curve();
  for (RDPoint& p : doubled) p.bpv *= 2.0;
  EXPECT_NEAR(bd_rate(anchor_curve(), doubled), 100.0, 1e-6);
  EXPECT_NEAR(bd_rate(anchor_curve(), std::vector<RDPoint>{
                          {0.2, 30.0}, {0.4, 34.0}, {0.8, 39.0}, {1.6, 45.0}}),
              -50.0, 1e-6);
}

TEST(BdRate, IsAntisymmetricToFirstOrder) {
  const std::vector<RDPoint> other = {{0.3, 31.0}, {0.7, 35.0}, {1.3, 40.0}, {2.9, 44.0}};
  const double ab = bd_rate(anchor_curve(), other);
  const double ba = bd_rate(other, anchor_curve());
  // (1 + ab/100) * (1 + ba/100) = 1 up to fitting differences.
  EXPECT_NEAR((1.0 + ab / 100.0) * (1.0 + ba / 100.0), 1.0, 0.005);
}

// Independent oracle: interpolate each 4-point curve with the exact cubic
// (Gaussian elimination on the Vandermonde system) and integrate by a
// fine-grained trapezoid rule instead of the closed-form antiderivative.
double bd_rate_oracle(const std::vector<RDPoint>& anchor, const std::vector<RDPoint>& test) {
  auto fit = [](const std::vector<RDPoint>& pts) {
    std::array<std::array<double, 5>, 4> m{};
    for (int r = 0; r < 4; ++r) {
      const double p = pts[size_t(r)].psnr_y;
      m[r] = {1.0, p, p * p, p * p * p, std::log10(pts[size_t(r)].bpv)};
    }
    for (int col = 0; col < 4; ++col) {
      int pivot = col;
      for (int r = col + 1; r < 4; ++r)
        if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
      std::swap(m[col], m[pivot]);
      for (int r = 0; r < 4; ++r) {
        if (r == col) continue;
        const double f = m[r][col] / m[col][col];
        for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
      }
    }
    std::array<double, 4> coeff{};
    for (int r = 0; r < 4; ++r) coeff[r] = m[r][4] / m[r][r];
    return coeff;
  };
  const std::array<double, 4> ca = fit(anchor), ct = fit(test);
  const double lo = std::max(anchor.front().psnr_y, test.front().psnr_y);
  const double hi = std::min(anchor.back().psnr_y, test.back().psnr_y);
  auto eval = [](const std::array<double, 4>& c, double p) {
    return c[0] + c[1] * p + c[2] * p * p + c[3] * p * p * p;
  };
  const int steps = 200000;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double p0 = lo + (hi - lo) * i / steps;
    const double p1 = lo + (hi - lo) * (i + 1) / steps;
    acc += 0.5 * (eval(ct, p0) - eval(ca, p0) + eval(ct, p1) - eval(ca, p1)) * (p1 - p0);
  }
  return (std::pow(10.0, acc / (hi - lo)) - 1.0) * 100.0;
}

TEST(BdRate, MatchesAnIndependentTrapezoidOracle) {
  const std::vector<RDPoint> test = {{0.33, 31.5}, {0.62, 36.0}, {1.21, 41.0}, {2.5, 46.5}};
  const double got = bd_rate(anchor_curve(), test);
  const double want = bd_rate_oracle(anchor_curve(), test);
  EXPECT_NEAR(got, want, std::abs(want) * 0.001 + 1e-6);
}

TEST(BdRate, RejectsUnusableCurves) {
  std::vector<RDPoint> three(anchor_curve().begin(), anchor_curve().end() - 1);
  EXPECT_THROW(bd_rate(three, anchor_curve()), DomainError);
  EXPECT_THROW(bd_rate(anchor_curve(), three), DomainError);

  std::vector<RDPoint> nonmono = anchor_curve();
  std::swap(nonmono[1], nonmono[2]);
  EXPECT_THROW(bd_rate(anchor_curve(), nonmono), DomainError);

  const std::vector<RDPoint> far = {{0.4, 50.0}, {0.8, 54.0}, {1.6, 59.0}, {3.2, 65.0}};
  EXPECT_THROW(bd_rate(anchor_curve(), far), DomainError);
}

TEST(Synth, SeededTwiceIsIdentical) {
  for (SynthKind kind : {SynthKind::translating_texture_plane, SynthKind::rotating_shell,
                         SynthKind::half_voxel_shift}) {
    const std::vector<Frame> a = synth_sequence(kind, 3, 32, 7);
    const std::vector<Frame> b = synth_sequence(kind, 3, 32, 7);
    ASSERT_EQ(a.size(), b.size());
    for (size_t t = 0; t < a.size(); ++t) {
      ASSERT_EQ(a[t].voxels.size(), b[t].voxels.size());
      for (size_t i = 0; i < a[t].voxels.size(); ++i) {
        EXPECT_EQ(a[t].voxels[i].coord, b[t].voxels[i].coord);
        EXPECT_EQ(a[t].voxels[i].attr.x, b[t].voxels[i].attr.x);
      }
    }
    const std::vector<Frame> c = synth_sequence(kind, 1, 32, 8);
    bool differs = c[0].voxels.size() != a[0].voxels.size();
    for (size_t i = 0; !differs && i < c[0].voxels.size(); ++i)
      differs = c[0].voxels[i].coord != a[0].voxels[i].coord ||
                c[0].voxels[i].attr.x != a[0].voxels[i].attr.x;
    EXPECT_TRUE(differs) << "seed must influence kind " << int(kind);
  }
}

TEST(Synth, HalfVoxelShiftPairIsDisjointAndInterleaved) {
  const std::vector<Frame> frames = synth_sequence(SynthKind::half_voxel_shift, 2, 32, 1);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].voxels.size(), frames[1].voxels.size());
  EXPECT_GT(frames[0].voxels.size(), 100u);

  std::set<Vec3i> first;
  for (const Voxel& v : frames[0].voxels) first.insert(v.coord);
  for (const Voxel& v : frames[1].voxels)
    EXPECT_EQ(first.count(v.coord), 0u) << "coordinate sets must be disjoint";

  // Along every (y, z) ray the x positions of frame 1 are frame 0's plus one.
  std::map<std::pair<int, int>, std::set<int>> xs0, xs1;
  for (const Voxel& v : frames[0].voxels) xs0[{v.coord.y, v.coord.z}].insert(v.coord.x);
  for (const Voxel& v : frames[1].voxels) xs1[{v.coord.y, v.coord.z}].insert(v.coord.x);
  ASSERT_EQ(xs0.size(), xs1.size());
  for (const auto& [ray, xs] : xs0) {
    std::set<int> shifted;
    for (int x : xs) shifted.insert(x + 1);
    EXPECT_EQ(xs1.at(ray), shifted);
  }
}

TEST(Synth, PlaneDisplacementIsRecoverableByIntegerSearch) {
  const std::vector<Frame> rgb = synth_sequence(SynthKind::translating_texture_plane, 9, 64, 3);
  const Frame ref = rgb_to_yuv(rgb[0]);
  const Frame target = rgb_to_yuv(rgb[1]);
  const std::vector<Block> blocks = partition(target, 16);
  int interior = 0;
  for (const Block& b : blocks) {
    int max_x = 0;
    for (uint32_t vi : b.voxel_indices)
      max_x = std::max(max_x, target.voxels[vi].coord.x);
    if (max_x > 58) continue;  // the +1 counterpart leaves the generated strip
    ++interior;
    const IvmeResult r = ivme_search(target, b, ref, 4);
    EXPECT_EQ(r.mv.vec(), (Vec3i{1, 0, 0}));
    EXPECT_NEAR(r.score.hybrid, 0.0, 1e-12);
  }
  EXPECT_GE(interior, 5);
}

TEST(Synth, RotatingShellStaysInsideTheGrid) {
  const std::vector<Frame> frames = synth_sequence(SynthKind::rotating_shell, 2, 32, 5);
  for (const Frame& f : frames) {
    EXPECT_GT(f.voxels.size(), 100u);
    for (const Voxel& v : f.voxels) {
      for (int a = 0; a < 3; ++a) {
        EXPECT_GE(v.coord[a], 0);
        EXPECT_LT(v.coord[a], 32);
      }
      for (int c = 0; c < 3; ++c) {
        EXPECT_GE(v.attr[c], 0.0);
        EXPECT_LE(v.attr[c], 255.0);
      }
    }
  }
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

size_t count_columns(const std::string& line) {
  return size_t(std::count(line.begin(), line.end(), ',')) + 1;
}

std::string strip_wall_time(const std::string& csv) {
  std::string out;
  for (const std::string& line : split_lines(csv)) {
    const size_t cut = line.rfind(',');
    out += line.substr(0, cut) + '\n';
  }
  return out;
}

TEST(Sweep, SingleCellReportShape) {
  const std::vector<Frame> frames = synth_sequence(SynthKind::translating_texture_plane, 1, 16, 2);
  const SweepReport report =
      rd_sweep(frames, {Mode::intra_raht}, {8.0}, CodecConfig{});
  const std::vector<std::string> lines = split_lines(report.csv);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "mode,step,bpv,psnr_y,mv_bits_share,empty_window_count,wall_time_s");
  EXPECT_EQ(count_columns(lines[1]), 7u);
  EXPECT_EQ(lines[1].substr(0, 13), "intra-raht,8,");
  ASSERT_EQ(report.cells.size(), 1u);
  EXPECT_TRUE(report.cells[0].ok);
  EXPECT_GT(report.cells[0].bpv, 0.0);
}

TEST(Sweep, FailedCellsBecomeNaRowsWithoutAborting) {
  const std::vector<Frame> frames = synth_sequence(SynthKind::translating_texture_plane, 1, 16, 2);
  // A subnormal step overflows the 32-bit quantizer range: the cell must
  // fail cleanly while the other cell still reports.
  const SweepReport report =
      rd_sweep(frames, {Mode::intra_ragft}, {8.0, 1e-300}, CodecConfig{});
  ASSERT_EQ(report.cells.size(), 2u);
  EXPECT_TRUE(report.cells[0].ok);
  EXPECT_FALSE(report.cells[1].ok);
  EXPECT_FALSE(report.cells[1].error.empty());
  const std::vector<std::string> lines = split_lines(report.csv);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[2], "intra-ragft,1e-300,NA,NA,NA,NA,NA");
}

TEST(Sweep, ReportIsByteStableUpToWallTime) {
  const std::vector<Frame> frames = synth_sequence(SynthKind::half_voxel_shift, 3, 32, 4);
  const std::vector<Mode> modes = {Mode::dm, Mode::fvme};
  const std::vector<double> steps = {8.0, 32.0};
  const SweepReport a = rd_sweep(frames, modes, steps, CodecConfig{});
  const SweepReport b = rd_sweep(frames, modes, steps, CodecConfig{});
  EXPECT_EQ(strip_wall_time(a.csv), strip_wall_time(b.csv));
  ASSERT_EQ(a.cells.size(), 4u);
  for (size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].mode, modes[i / steps.size()]);
    EXPECT_EQ(a.cells[i].step, steps[i % steps.size()]);
    EXPECT_EQ(a.cells[i].bpv, b.cells[i].bpv);
    EXPECT_EQ(a.cells[i].psnr_y, b.cells[i].psnr_y);
  }
}

TEST(Sweep, BdTableAndPredictionSseOrdering) {
  const std::vector<Frame> frames = synth_sequence(SynthKind::half_voxel_shift, 3, 32, 1);
  const std::vector<Mode> modes = {Mode::dm_rf, Mode::fvme};
  const std::vector<double> steps = {2.0, 8.0, 32.0, 128.0};
  const SweepReport report = rd_sweep(frames, modes, steps, CodecConfig{}, Mode::dm_rf);

  const std::vector<std::string> lines = split_lines(report.csv);
  ASSERT_EQ(lines.size(), 1u + 8u + 1u + 1u + 1u);  // header, rows, blank, bd header, bd row
  EXPECT_EQ(lines[9], "");
  EXPECT_EQ(lines[10], "mode,bd_rate_pct_vs_dm-rf");
  ASSERT_EQ(lines[11].substr(0, 5), "fvme,");
  const double bd = std::stod(lines[11].substr(5));
  EXPECT_LT(bd, 0.0);  // fractional search beats its own integer baseline

  for (size_t s = 0; s < steps.size(); ++s) {
    const SweepCell& rf = report.cells[s];
    const SweepCell& fv = report.cells[steps.size() + s];
    ASSERT_TRUE(rf.ok && fv.ok);
    EXPECT_GT(rf.pred_sse, 0.0);
    EXPECT_LE(fv.pred_sse, rf.pred_sse) << "step " << steps[s];
  }
}

}  // namespace
