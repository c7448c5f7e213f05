#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pcvc/codec.hpp"
#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"
#include "pcvc/metrics.hpp"

namespace pcvc {

// One (mode, step) evaluation of a sweep.
struct SweepCell {
  Mode mode = Mode::fvme;
  double step = 0.0;
  bool ok = false;
  std::string error;
  double bpv = 0.0;
  double psnr_y = 0.0;
  double psnr_u = 0.0;
  double psnr_v = 0.0;
  double mv_bits_share = 0.0;  // MV section bits / total payload bits
  uint64_t empty_window_count = 0;
  double pred_sse = 0.0;  // selected-prediction SSE summed over inter frames
  double wall_time_s = 0.0;
};

struct SweepReport {
  std::vector<SweepCell> cells;  // ordered by (mode, step) as given
  std::string csv;               // RD table plus BD-rate table
};

namespace sweep_detail {

inline SweepCell run_cell(const std::vector<Frame>& yuv_originals, const CodecConfig& base,
                          Mode mode, double step) {
  SweepCell cell;
  cell.mode = mode;
  cell.step = step;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    CodecConfig cfg = base;
    cfg.mode = mode;
    cfg.step = step;
    const EncodeResult enc = encode_sequence(yuv_originals, cfg);

    std::vector<size_t> bits, voxels;
    uint64_t mv_bits = 0;
    for (const FrameStats& st : enc.stats) {
      bits.push_back(st.payload_bits);
      voxels.push_back(st.voxel_count);
      mv_bits += st.mv_bits;
      cell.empty_window_count += st.empty_windows;
      if (!st.intra)
        cell.pred_sse += st.residual_sse.x + st.residual_sse.y + st.residual_sse.z;
    }
    cell.bpv = bpv(bits, voxels);
    cell.psnr_y = psnr_y(yuv_originals, enc.recons);
    cell.psnr_u = psnr_channel(yuv_originals, enc.recons, 1);
    cell.psnr_v = psnr_channel(yuv_originals, enc.recons, 2);
    size_t total_bits = 0;
    for (size_t b : bits) total_bits += b;
    cell.mv_bits_share = total_bits ? double(mv_bits) / double(total_bits) : 0.0;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  cell.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

inline std::string fmt_g6(double v) {
  if (v == std::numeric_limits<double>::infinity()) return "inf";
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace sweep_detail

// Encodes and scores the sequence per (mode, step) cell — cells run in
// parallel, they are independent encodes — and assembles the CSV report:
// one RD row per cell in (mode, step) order, then a BD-rate table of every
// mode against `anchor`. Failed cells become NA rows instead of aborting
// the sweep.
inline SweepReport rd_sweep(const std::vector<Frame>& sequence, const std::vector<Mode>& modes,
                            const std::vector<double>& steps, const CodecConfig& base,
                            std::optional<Mode> anchor = std::nullopt) {
  using namespace sweep_detail;
  if (modes.empty() || steps.empty()) throw DomainError("sweep needs modes and steps");

  std::vector<Frame> yuv;
  yuv.reserve(sequence.size());
  for (const Frame& f : sequence)
    yuv.push_back(f.color_space == ColorSpace::RGB ? rgb_to_yuv(f) : f);

  std::vector<std::future<SweepCell>> futures;
  futures.reserve(modes.size() * steps.size());
  for (Mode m : modes)
    for (double s : steps)
      futures.push_back(std::async(std::launch::async, run_cell, std::cref(yuv), std::cref(base),
                                   m, s));

  SweepReport report;
  report.cells.reserve(futures.size());
  for (auto& f : futures) report.cells.push_back(f.get());

  std::string& csv = report.csv;
  csv = "mode,step,bpv,psnr_y,mv_bits_share,empty_window_count,wall_time_s\n";
  for (const SweepCell& c : report.cells) {
    csv += mode_name(c.mode);
    csv += ',';
    csv += fmt_g6(c.step);
    if (c.ok) {
      csv += ',' + fmt_g6(c.bpv) + ',' + fmt_g6(c.psnr_y) + ',' + fmt_g6(c.mv_bits_share) + ',' +
             std::to_string(c.empty_window_count) + ',' + fmt_g6(c.wall_time_s);
    } else {
      csv += ",NA,NA,NA,NA,NA";
    }
    csv += '\n';
  }

  if (anchor) {
    // RD points per mode, ascending rate (larger steps give fewer bits).
    auto points_of = [&](Mode m) {
      std::vector<RDPoint> pts;
      for (const SweepCell& c : report.cells)
        if (c.mode == m && c.ok && std::isfinite(c.psnr_y)) pts.push_back({c.bpv, c.psnr_y});
      std::sort(pts.begin(), pts.end(),
                [](const RDPoint& a, const RDPoint& b) { return a.bpv < b.bpv; });
      return pts;
    };
    const std::vector<RDPoint> anchor_pts = points_of(*anchor);
    csv += '\n';
    csv += std::string("mode,bd_rate_pct_vs_") + mode_name(*anchor) + '\n';
    for (Mode m : modes) {
      if (m == *anchor) continue;
      csv += mode_name(m);
      try {
        csv += ',' + fmt_g6(bd_rate(anchor_pts, points_of(m)));
      } catch (const std::exception&) {
        csv += ",NA";
      }
      csv += '\n';
    }
  }
  return report;
}

}  // namespace pcvc
