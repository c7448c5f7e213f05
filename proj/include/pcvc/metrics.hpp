#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"

namespace pcvc {

// Sequence-level PSNR of one channel: per-frame MSEs (normalized by 255^2)
// are averaged across frames inside the log. Exact reconstruction returns
// +infinity.
inline double psnr_channel(const std::vector<Frame>& originals, const std::vector<Frame>& recons,
                           int channel) {
  if (channel < 0 || channel > 2) throw DomainError("psnr channel must be 0, 1 or 2");
  if (originals.size() != recons.size() || originals.empty())
    throw DomainError("psnr needs equally many original and reconstructed frames");
  double acc = 0.0;
  for (size_t t = 0; t < originals.size(); ++t) {
    const Frame& a = originals[t];
    const Frame& b = recons[t];
    if (a.color_space != ColorSpace::YUV || b.color_space != ColorSpace::YUV)
      throw StateError("psnr expects YUV frames");
    if (a.voxels.size() != b.voxels.size())
      throw DomainError("psnr: voxel count mismatch at frame " + std::to_string(t));
    if (a.voxels.empty()) throw DomainError("psnr: empty frame");
    double sse = 0.0;
    for (size_t i = 0; i < a.voxels.size(); ++i) {
      if (a.voxels[i].coord != b.voxels[i].coord)
        throw DomainError("psnr: frames are not on the same voxels");
      const double d = a.voxels[i].attr[channel] - b.voxels[i].attr[channel];
      sse += d * d;
    }
    acc += sse / (255.0 * 255.0 * double(a.voxels.size()));
  }
  const double mean = acc / double(originals.size());
  if (mean == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mean);
}

// Headline metric: luma PSNR.
inline double psnr_y(const std::vector<Frame>& originals, const std::vector<Frame>& recons) {
  return psnr_channel(originals, recons, 0);
}

// Rate in bits per occupied voxel, pooled over the sequence.
inline double bpv(std::span<const size_t> frame_bits, std::span<const size_t> frame_voxels) {
  if (frame_bits.size() != frame_voxels.size() || frame_bits.empty())
    throw DomainError("bpv needs matching non-empty bit and voxel counts");
  size_t bits = 0, voxels = 0;
  for (size_t t = 0; t < frame_bits.size(); ++t) {
    bits += frame_bits[t];
    voxels += frame_voxels[t];
  }
  if (voxels == 0) throw DomainError("bpv: zero voxels");
  return double(bits) / double(voxels);
}

struct RDPoint {
  double bpv = 0.0;
  double psnr_y = 0.0;
};

namespace metrics_detail {

// Least-squares cubic of log10(rate) as a function of PSNR.
inline Eigen::Vector4d fit_log_rate(std::span<const RDPoint> pts) {
  Eigen::MatrixXd vand(pts.size(), 4);
  Eigen::VectorXd rhs(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    const double p = pts[i].psnr_y;
    vand(Eigen::Index(i), 0) = 1.0;
    vand(Eigen::Index(i), 1) = p;
    vand(Eigen::Index(i), 2) = p * p;
    vand(Eigen::Index(i), 3) = p * p * p;
    rhs(Eigen::Index(i)) = std::log10(pts[i].bpv);
  }
  return vand.colPivHouseholderQr().solve(rhs);
}

inline double integrate_cubic(const Eigen::Vector4d& c, double lo, double hi) {
  auto antideriv = [&](double x) {
    return c(0) * x + c(1) * x * x / 2.0 + c(2) * x * x * x / 3.0 + c(3) * x * x * x * x / 4.0;
  };
  return antideriv(hi) - antideriv(lo);
}

inline void check_curve(std::span<const RDPoint> pts, const char* name) {
  if (pts.size() < 4)
    throw DomainError(std::string("bd_rate: ") + name + " needs at least 4 RD points");
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1].bpv > pts[i].bpv))
      throw DomainError(std::string("bd_rate: ") + name + " rates must strictly increase");
    if (!(pts[i + 1].psnr_y > pts[i].psnr_y))
      throw DomainError(std::string("bd_rate: ") + name + " PSNR must strictly increase");
  }
  for (const RDPoint& p : pts)
    if (!(p.bpv > 0.0) || !std::isfinite(p.psnr_y))
      throw DomainError(std::string("bd_rate: ") + name + " points must be finite and positive");
}

}  // namespace metrics_detail

// Bjontegaard rate delta of `test` against `anchor`, in percent; negative
// means the test curve needs fewer bits for the same quality. Both curves are
// fit with a cubic of log10(bpv) over PSNR and compared over the common
// PSNR interval.
inline double bd_rate(std::span<const RDPoint> anchor, std::span<const RDPoint> test) {
  using namespace metrics_detail;
  check_curve(anchor, "anchor");
  check_curve(test, "test");
  const double lo = std::max(anchor.front().psnr_y, test.front().psnr_y);
  const double hi = std::min(anchor.back().psnr_y, test.back().psnr_y);
  if (!(hi > lo)) throw DomainError("bd_rate: PSNR ranges do not overlap");
  const Eigen::Vector4d ca = fit_log_rate(anchor);
  const Eigen::Vector4d ct = fit_log_rate(test);
  const double diff = integrate_cubic(ct, lo, hi) - integrate_cubic(ca, lo, hi);
  return (std::pow(10.0, diff / (hi - lo)) - 1.0) * 100.0;
}

}  // namespace pcvc
