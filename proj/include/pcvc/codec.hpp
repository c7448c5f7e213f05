#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcvc/bitstream.hpp"
#include "pcvc/byte_codec.hpp"
#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"
#include "pcvc/graph_transform.hpp"
#include "pcvc/motion.hpp"
#include "pcvc/mv_pack.hpp"
#include "pcvc/quant.hpp"
#include "pcvc/raht.hpp"
#include "pcvc/rlgr.hpp"
#include "pcvc/superres.hpp"

namespace pcvc {

inline constexpr double kDefaultRho = 1.7320508075688772;  // sqrt(3)

struct CodecConfig {
  Mode mode = Mode::fvme;
  double step = 16.0;
  int gop = 32;
  int block_size = 16;
  double rho = kDefaultRho;       // super-resolution pairing radius
  int search_window = 4;          // integer search range per axis
  EpredChannels epred = EpredChannels::yuv;
  MvCodec mv_codec = MvCodec::stored;
  std::vector<MvMap> imported_mvs;  // per frame; non-empty switches MV source to import

  void validate() const {
    if (!(step > 0.0)) throw DomainError("step must be positive");
    if (gop < 1 || gop > 255) throw DomainError("gop must be in [1, 255]");
    if (block_size < 2 || block_size > 255 || (block_size & (block_size - 1)))
      throw DomainError("block_size must be a power of two in [2, 255]");
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
    if (search_window < 1 || search_window > IntegerMV::kRange - 1)
      throw DomainError("search_window must leave refinement room in [-15, 15]");
  }

  bool imports_mvs() const { return !imported_mvs.empty(); }
};

struct FrameStats {
  bool intra = false;
  uint32_t voxel_count = 0;
  size_t payload_bits = 0;   // container bits attributed to this frame (b_t)
  size_t mv_bits = 0;        // compressed MV section payload bits
  uint32_t empty_windows = 0;
  uint32_t missing_mv = 0;   // imported-MV lookups that fell back to zero
  Vec3d residual_sse{0, 0, 0};  // energy of original - prediction (intra: of the signal)
  double search_sse = 0.0;      // SSE reported by the final search stage, summed over blocks
};

struct EncodeResult {
  Bitstream stream;
  std::vector<Frame> recons;  // encoder-side reconstructions, YUV
  std::vector<FrameStats> stats;
  // Chosen integer MVs per frame in block units (empty for intra frames).
  std::vector<std::vector<std::pair<Vec3i, IntegerMV>>> mv_maps;
};

namespace codec_detail {

inline std::vector<double> channel_values(const Frame& f, int ch) {
  std::vector<double> v(f.voxels.size());
  for (size_t i = 0; i < f.voxels.size(); ++i) v[i] = f.voxels[i].attr[ch];
  return v;
}

inline ChannelPayload code_plan(const CoefficientPlan& plan, double step) {
  ChannelPayload out;
  std::vector<double> ac_flat;
  for (const auto& a : plan.ac) ac_flat.insert(ac_flat.end(), a.begin(), a.end());
  const std::vector<int32_t> qdc = quantize(plan.dc, step);
  const std::vector<int32_t> qac = quantize(ac_flat, step);
  out.dc_count = uint32_t(qdc.size());
  out.ac_count = uint32_t(qac.size());
  out.dc_bytes = rlgr_encode(qdc).bytes;
  out.ac_bytes = rlgr_encode(qac).bytes;
  return out;
}

// Decodes one RLGR section and enforces that the declared byte length holds
// exactly the coded bits plus final padding.
inline std::vector<int32_t> decode_section(const std::vector<uint8_t>& bytes, size_t count) {
  auto [symbols, bits] = rlgr_decode(bytes, count);
  const uint64_t have = uint64_t(bytes.size()) * 8;
  if (bits > have || have - bits >= 8)
    throw CorruptionError("coefficient section length mismatch");
  return symbols;
}

// Rebuilds a CoefficientPlan for a block layout from flat DC/AC symbol
// streams dequantized at `step`.
inline CoefficientPlan unflatten_plan(const std::vector<Block>& blocks,
                                      const std::vector<int32_t>& qdc,
                                      const std::vector<int32_t>& qac, double step) {
  if (qdc.size() != blocks.size()) throw CorruptionError("dc count does not match block count");
  size_t want_ac = 0;
  for (const Block& b : blocks) want_ac += b.voxel_indices.size() - 1;
  if (qac.size() != want_ac) throw CorruptionError("ac count does not match block sizes");

  CoefficientPlan plan;
  plan.dc = dequantize(qdc, step);
  plan.ac.resize(blocks.size());
  size_t pos = 0;
  for (size_t bi = 0; bi < blocks.size(); ++bi) {
    const size_t n = blocks[bi].voxel_indices.size() - 1;
    const std::vector<int32_t> q(qac.begin() + pos, qac.begin() + pos + n);
    plan.ac[bi] = dequantize(q, step);
    pos += n;
  }
  return plan;
}

inline std::vector<Vec3i> frame_coords(const Frame& f) {
  std::vector<Vec3i> coords(f.voxels.size());
  for (size_t i = 0; i < f.voxels.size(); ++i) coords[i] = f.voxels[i].coord;
  return coords;
}

// Per-block prediction for one inter frame, shared verbatim by encoder and
// decoder so the closed loop stays bit-exact.
inline std::vector<Prediction> predict_frame(const Frame& target, const std::vector<Block>& blocks,
                                             const Frame& ref, const SuperCloud* super_ref,
                                             std::span<const MVRecord> records, Mode mode) {
  std::vector<Prediction> preds;
  preds.reserve(blocks.size());
  for (size_t bi = 0; bi < blocks.size(); ++bi) {
    const MVRecord& rec = records[bi];
    if (mode_uses_superres(mode)) {
      const FractionalMV f = rec.fv.value_or(FractionalMV());
      preds.push_back(predict_block(target, blocks[bi], *super_ref, rec.iv, f));
    } else {
      preds.push_back(predict_block_integer(target, blocks[bi], ref, rec.iv.vec()));
    }
  }
  return preds;
}

}  // namespace codec_detail

// --- decoder ---------------------------------------------------------------

// Reconstructs one intra frame's attributes (YUV, frame voxel order).
inline std::vector<Vec3d> decode_frame_intra(const FramePayload& payload, const Frame& geom,
                                             const StreamHeader& header) {
  using namespace codec_detail;
  if (payload.voxel_count != geom.voxels.size())
    throw DomainError("geometry voxel count does not match payload");
  const std::vector<Block> blocks = partition(geom, header.block_size);
  std::vector<Vec3d> attrs(geom.voxels.size());

  if (header.mode == Mode::intra_raht) {
    const Raht tf(frame_coords(geom), geom.depth);
    for (int ch = 0; ch < 3; ++ch) {
      const ChannelPayload& cp = payload.channels[ch];
      if (cp.dc_count != 1 || cp.ac_count != geom.voxels.size() - 1)
        throw CorruptionError("raht coefficient counts do not match geometry");
      const std::vector<int32_t> qdc = decode_section(cp.dc_bytes, cp.dc_count);
      const std::vector<int32_t> qac = decode_section(cp.ac_bytes, cp.ac_count);
      std::vector<double> coeffs = dequantize(qdc, header.step);
      const std::vector<double> ac = dequantize(qac, header.step);
      coeffs.insert(coeffs.end(), ac.begin(), ac.end());
      const std::vector<double> values = tf.inverse(coeffs);
      for (size_t i = 0; i < attrs.size(); ++i) attrs[i][ch] = values[i];
    }
    return attrs;
  }

  const Ragft1 tf(geom, blocks);
  for (int ch = 0; ch < 3; ++ch) {
    const ChannelPayload& cp = payload.channels[ch];
    const std::vector<int32_t> qdc = decode_section(cp.dc_bytes, cp.dc_count);
    const std::vector<int32_t> qac = decode_section(cp.ac_bytes, cp.ac_count);
    const CoefficientPlan plan = unflatten_plan(blocks, qdc, qac, header.step);
    const std::vector<double> values = tf.inverse(plan, geom.voxels.size());
    for (size_t i = 0; i < attrs.size(); ++i) attrs[i][ch] = values[i];
  }
  return attrs;
}

// Reconstructs one inter frame's attributes from its payload, the geometry
// and the previously decoded reference.
inline std::vector<Vec3d> decode_frame_inter(const FramePayload& payload, const Frame& geom,
                                             const Frame& prev_recon, const StreamHeader& header,
                                             double rho = kDefaultRho) {
  using namespace codec_detail;
  if (payload.voxel_count != geom.voxels.size())
    throw DomainError("geometry voxel count does not match payload");
  if (!payload.mv_bytes) throw CorruptionError("inter frame lacks an MV section");
  const std::vector<Block> blocks = partition(geom, header.block_size);

  const bool fractional = mode_uses_fractional(header.mode);
  const size_t mv_bits = blocks.size() * (fractional ? 23 : 15);
  const std::vector<uint8_t> mv_raw =
      byte_decompress(header.mv_codec, *payload.mv_bytes, (mv_bits + 7) / 8);
  const std::vector<MVRecord> records = unpack_mvs(mv_raw, blocks.size(), fractional);

  std::optional<SuperCloud> super_ref;
  if (mode_uses_superres(header.mode)) super_ref = superresolve(prev_recon, rho);

  // The geometry frame may carry arbitrary colors (e.g. the original PLYs);
  // prediction must see only its coordinates, so strip the attributes.
  Frame shell;
  shell.depth = geom.depth;
  shell.color_space = ColorSpace::YUV;
  shell.voxels.resize(geom.voxels.size());
  for (size_t i = 0; i < geom.voxels.size(); ++i) shell.voxels[i].coord = geom.voxels[i].coord;

  const std::vector<Prediction> preds =
      predict_frame(shell, blocks, prev_recon, super_ref ? &*super_ref : nullptr, records,
                    header.mode);

  std::vector<Vec3d> attrs(geom.voxels.size());
  const Ragft1 tf(geom, blocks);
  for (int ch = 0; ch < 3; ++ch) {
    const ChannelPayload& cp = payload.channels[ch];
    const std::vector<int32_t> qdc = decode_section(cp.dc_bytes, cp.dc_count);
    const std::vector<int32_t> qac = decode_section(cp.ac_bytes, cp.ac_count);
    const CoefficientPlan plan = unflatten_plan(blocks, qdc, qac, header.step);
    const std::vector<double> residual = tf.inverse(plan, geom.voxels.size());
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
      const Block& b = blocks[bi];
      for (size_t k = 0; k < b.voxel_indices.size(); ++k) {
        const uint32_t vi = b.voxel_indices[k];
        attrs[vi][ch] = residual[vi] + preds[bi].attrs[k][ch];
      }
    }
  }
  return attrs;
}

// Decodes a whole stream against out-of-band geometry. Returns YUV frames;
// `rho` must match the encoder's setting (the default is the only value the
// standard toolchain uses).
inline std::vector<Frame> decode_sequence(const Bitstream& bs, const std::vector<Frame>& geometry,
                                          double rho = kDefaultRho) {
  if (geometry.size() != bs.frames.size())
    throw DomainError("geometry frame count does not match stream");
  std::vector<Frame> out;
  out.reserve(bs.frames.size());
  for (size_t t = 0; t < bs.frames.size(); ++t) {
    const Frame& geom = geometry[t];
    if (geom.depth != bs.header.depth) throw DomainError("geometry depth does not match stream");
    const bool intra = !mode_is_inter(bs.header.mode) || t % bs.header.gop == 0;
    std::vector<Vec3d> attrs =
        intra ? decode_frame_intra(bs.frames[t], geom, bs.header)
              : decode_frame_inter(bs.frames[t], geom, out.back(), bs.header, rho);
    Frame f;
    f.depth = geom.depth;
    f.color_space = ColorSpace::YUV;
    f.voxels.resize(geom.voxels.size());
    for (size_t i = 0; i < geom.voxels.size(); ++i)
      f.voxels[i] = {geom.voxels[i].coord, attrs[i]};
    out.push_back(std::move(f));
  }
  return out;
}

// --- encoder ---------------------------------------------------------------

struct IntraFrameResult {
  FramePayload payload;
  std::vector<Vec3d> recon_attrs;
  FrameStats stats;
};

inline IntraFrameResult encode_frame_intra(const Frame& yuv, const CodecConfig& cfg) {
  using namespace codec_detail;
  IntraFrameResult out;
  out.payload.voxel_count = uint32_t(yuv.voxels.size());
  out.stats.intra = true;
  out.stats.voxel_count = out.payload.voxel_count;

  StreamHeader header;
  header.depth = uint8_t(yuv.depth);
  header.block_size = uint8_t(cfg.block_size);
  header.gop = uint8_t(cfg.gop);
  header.mode = cfg.mode;
  header.mv_codec = cfg.mv_codec;
  header.step = cfg.step;

  if (cfg.mode == Mode::intra_raht) {
    const Raht tf(frame_coords(yuv), yuv.depth);
    for (int ch = 0; ch < 3; ++ch) {
      const std::vector<double> coeffs = tf.forward(channel_values(yuv, ch));
      const std::vector<int32_t> q = quantize(coeffs, cfg.step);
      ChannelPayload& cp = out.payload.channels[ch];
      cp.dc_count = 1;
      cp.ac_count = uint32_t(coeffs.size() - 1);
      cp.dc_bytes = rlgr_encode(std::span(q).subspan(0, 1)).bytes;
      cp.ac_bytes = rlgr_encode(std::span(q).subspan(1)).bytes;
    }
  } else {
    const std::vector<Block> blocks = partition(yuv, cfg.block_size);
    const Ragft1 tf(yuv, blocks);
    for (int ch = 0; ch < 3; ++ch)
      out.payload.channels[ch] = code_plan(tf.forward(channel_values(yuv, ch)), cfg.step);
  }

  out.recon_attrs = decode_frame_intra(out.payload, yuv, header);
  for (size_t i = 0; i < yuv.voxels.size(); ++i) {
    const Vec3d d = yuv.voxels[i].attr;
    out.stats.residual_sse = out.stats.residual_sse + Vec3d{d.x * d.x, d.y * d.y, d.z * d.z};
  }
  out.stats.payload_bits = 8 * frame_payload_bytes(out.payload);
  return out;
}

struct InterFrameResult {
  FramePayload payload;
  std::vector<Vec3d> recon_attrs;
  FrameStats stats;
  std::vector<std::pair<Vec3i, IntegerMV>> mvs;  // block units
};

inline InterFrameResult encode_frame_inter(const Frame& yuv, const Frame& prev_recon,
                                           const CodecConfig& cfg,
                                           const MvMap* imported = nullptr) {
  using namespace codec_detail;
  InterFrameResult out;
  out.payload.voxel_count = uint32_t(yuv.voxels.size());
  out.stats.voxel_count = out.payload.voxel_count;

  const std::vector<Block> blocks = partition(yuv, cfg.block_size);
  std::optional<SuperCloud> super_ref;
  if (mode_uses_superres(cfg.mode)) super_ref = superresolve(prev_recon, cfg.rho);

  std::vector<MVRecord> records(blocks.size());
  for (size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& b = blocks[bi];
    IntegerMV d;
    if (imported) {
      const Vec3i key{b.origin.x / cfg.block_size, b.origin.y / cfg.block_size,
                      b.origin.z / cfg.block_size};
      if (auto it = imported->find(key); it != imported->end()) {
        d = it->second;
      } else {
        out.stats.missing_mv += 1;
      }
    } else {
      d = ivme_search(yuv, b, prev_recon, cfg.search_window).mv;
    }
    if (mode_uses_refine(cfg.mode)) {
      const RefineResult rr = refine_iv(yuv, b, prev_recon, d, 1);
      d = rr.mv;
      if (cfg.mode == Mode::dm_rf) {
        out.stats.search_sse += rr.sse.x + rr.sse.y + rr.sse.z;
        out.stats.empty_windows += rr.empty_window ? 1 : 0;
      }
    }
    records[bi].iv = d;
    if (cfg.mode == Mode::fvme) {
      const FvmeResult fr = fvme_search(yuv, b, *super_ref, d, cfg.epred);
      records[bi].fv = fr.f;
      out.stats.search_sse += fr.sse.x + fr.sse.y + fr.sse.z;
      out.stats.empty_windows += fr.empty_window ? 1 : 0;
    } else if (cfg.mode == Mode::dm_rf_sr) {
      const Prediction p = predict_block(yuv, b, *super_ref, d, FractionalMV());
      out.stats.search_sse += p.sse.x + p.sse.y + p.sse.z;
      out.stats.empty_windows += p.empty_window;
    } else if (cfg.mode == Mode::dm) {
      const Prediction p = predict_block_integer(yuv, b, prev_recon, d.vec());
      out.stats.search_sse += p.sse.x + p.sse.y + p.sse.z;
      out.stats.empty_windows += p.empty_window;
    }
    out.mvs.emplace_back(Vec3i{b.origin.x / cfg.block_size, b.origin.y / cfg.block_size,
                               b.origin.z / cfg.block_size},
                         d);
  }

  // Residuals against the selected predictions, coded with the block transform.
  const std::vector<Prediction> preds =
      predict_frame(yuv, blocks, prev_recon, super_ref ? &*super_ref : nullptr, records,
                    cfg.mode);
  for (const Prediction& p : preds) out.stats.residual_sse = out.stats.residual_sse + p.sse;

  std::vector<Vec3d> residual(yuv.voxels.size());
  for (size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& b = blocks[bi];
    for (size_t k = 0; k < b.voxel_indices.size(); ++k) {
      const uint32_t vi = b.voxel_indices[k];
      residual[vi] = yuv.voxels[vi].attr - preds[bi].attrs[k];
    }
  }

  const Ragft1 tf(yuv, blocks);
  for (int ch = 0; ch < 3; ++ch) {
    std::vector<double> values(yuv.voxels.size());
    for (size_t i = 0; i < values.size(); ++i) values[i] = residual[i][ch];
    out.payload.channels[ch] = code_plan(tf.forward(values), cfg.step);
  }

  const std::vector<uint8_t> packed = pack_mvs(records);
  out.payload.mv_bytes = byte_compress(cfg.mv_codec, packed);
  out.stats.mv_bits = 8 * out.payload.mv_bytes->size();

  StreamHeader header;
  header.depth = uint8_t(yuv.depth);
  header.block_size = uint8_t(cfg.block_size);
  header.gop = uint8_t(cfg.gop);
  header.mode = cfg.mode;
  header.mv_codec = cfg.mv_codec;
  header.step = cfg.step;
  out.recon_attrs = decode_frame_inter(out.payload, yuv, prev_recon, header, cfg.rho);
  out.stats.payload_bits = 8 * frame_payload_bytes(out.payload);
  return out;
}

// Closed-loop encode: every inter frame references the previous *decoded*
// frame, and the returned reconstructions are produced by the decoder path
// itself, so decode_sequence reproduces them bit-exactly.
inline EncodeResult encode_sequence(const std::vector<Frame>& frames, const CodecConfig& cfg) {
  cfg.validate();
  if (frames.empty()) throw DomainError("cannot encode an empty sequence");
  for (const Frame& f : frames)
    if (f.depth != frames[0].depth) throw DomainError("frames must share one grid depth");
  if (frames[0].depth < 1 || frames[0].depth > 20)
    throw DomainError("grid depth out of [1, 20]");
  if (!cfg.imported_mvs.empty() && cfg.imported_mvs.size() != frames.size())
    throw DomainError("imported MV maps must cover every frame");

  // Work in YUV throughout; accept either tag on input.
  std::vector<Frame> yuv;
  yuv.reserve(frames.size());
  for (const Frame& f : frames)
    yuv.push_back(f.color_space == ColorSpace::RGB ? rgb_to_yuv(f) : f);

  EncodeResult result;
  result.stream.header.depth = uint8_t(frames[0].depth);
  result.stream.header.block_size = uint8_t(cfg.block_size);
  result.stream.header.gop = uint8_t(cfg.gop);
  result.stream.header.mode = cfg.mode;
  result.stream.header.mv_codec = cfg.mv_codec;
  result.stream.header.step = cfg.step;
  result.stream.header.frame_count = uint32_t(frames.size());

  for (size_t t = 0; t < yuv.size(); ++t) {
    const bool intra = !mode_is_inter(cfg.mode) || t % size_t(cfg.gop) == 0;
    if (intra) {
      IntraFrameResult r = encode_frame_intra(yuv[t], cfg);
      result.stream.frames.push_back(std::move(r.payload));
      result.stats.push_back(r.stats);
      result.mv_maps.emplace_back();
      Frame recon = yuv[t];
      for (size_t i = 0; i < recon.voxels.size(); ++i) recon.voxels[i].attr = r.recon_attrs[i];
      result.recons.push_back(std::move(recon));
    } else {
      const MvMap* imported =
          cfg.imports_mvs() ? &cfg.imported_mvs[t] : nullptr;
      InterFrameResult r = encode_frame_inter(yuv[t], result.recons[t - 1], cfg, imported);
      result.stream.frames.push_back(std::move(r.payload));
      result.stats.push_back(r.stats);
      result.mv_maps.push_back(std::move(r.mvs));
      Frame recon = yuv[t];
      for (size_t i = 0; i < recon.voxels.size(); ++i) recon.voxels[i].attr = r.recon_attrs[i];
      result.recons.push_back(std::move(recon));
    }
  }
  return result;
}

}  // namespace pcvc
