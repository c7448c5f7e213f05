// Command-line front end: encode, decode, metrics, synth, sweep.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pcvc/pcvc.hpp"

namespace {

using namespace pcvc;

struct SequenceArgs {
  std::vector<std::string> inputs;  // PLY paths
  std::string synth_kind;
  int frames = 8;
  int grid = 64;
  uint64_t seed = 1;
  int depth_override = -1;
};

void add_sequence_flags(CLI::App* cmd, SequenceArgs& args) {
  cmd->add_option("--input,-i", args.inputs, "input PLY frames, in display order");
  cmd->add_option("--synth", args.synth_kind,
                  "generate input instead: translating-texture-plane | rotating-shell | "
                  "half-voxel-shift");
  cmd->add_option("--frames", args.frames, "synthetic frame count")->check(CLI::PositiveNumber);
  cmd->add_option("--grid", args.grid, "synthetic grid size (power of two)");
  cmd->add_option("--seed", args.seed, "synthetic generator seed");
  cmd->add_option("--depth", args.depth_override, "override grid depth for PLY inputs");
}

std::vector<Frame> load_sequence(const SequenceArgs& args) {
  if (!args.synth_kind.empty()) {
    if (!args.inputs.empty()) throw DomainError("give either --input or --synth, not both");
    return synth_sequence(synth_kind_from_name(args.synth_kind), args.frames, args.grid,
                          args.seed);
  }
  if (args.inputs.empty()) throw DomainError("no input frames: use --input or --synth");
  std::vector<Frame> frames;
  frames.reserve(args.inputs.size());
  int depth = args.depth_override;
  for (const std::string& path : args.inputs) frames.push_back(load_ply(path, depth));
  // A sequence must share one grid depth; lift everything to the deepest.
  for (const Frame& f : frames) depth = std::max(depth, f.depth);
  for (Frame& f : frames)
    if (f.depth != depth) f = make_frame(std::move(f.voxels), depth, f.color_space);
  return frames;
}

struct CodecArgs {
  std::string mode = "fvme";
  double step = 16.0;
  int gop = 32;
  int block_size = 16;
  double rho = kDefaultRho;
  int search_window = 4;
  std::string epred = "yuv";
  std::string mv_codec = "stored";
};

void add_codec_flags(CLI::App* cmd, CodecArgs& args) {
  cmd->add_option("--mode", args.mode,
                  "intra-ragft | intra-raht | dm | dm-rf | dm-rf-sr | fvme");
  cmd->add_option("--step", args.step, "quantization step")->check(CLI::PositiveNumber);
  cmd->add_option("--gop", args.gop, "frames per intra period");
  cmd->add_option("--block-size", args.block_size, "cubic block edge length");
  cmd->add_option("--rho", args.rho, "super-resolution pairing radius");
  cmd->add_option("--search-window", args.search_window, "integer MV search range");
  cmd->add_option("--epred", args.epred, "prediction-error channels: yuv | y");
  cmd->add_option("--mv-codec", args.mv_codec, "MV section compressor: stored | lzma");
}

Mode mode_from_name(const std::string& name) {
  for (int id = 0; id <= 5; ++id)
    if (name == mode_name(Mode(id))) return Mode(id);
  throw DomainError("unknown mode: " + name);
}

CodecConfig to_config(const CodecArgs& args) {
  CodecConfig cfg;
  cfg.mode = mode_from_name(args.mode);
  cfg.step = args.step;
  cfg.gop = args.gop;
  cfg.block_size = args.block_size;
  cfg.rho = args.rho;
  cfg.search_window = args.search_window;
  if (args.epred == "yuv")
    cfg.epred = EpredChannels::yuv;
  else if (args.epred == "y")
    cfg.epred = EpredChannels::y_only;
  else
    throw DomainError("unknown --epred value: " + args.epred);
  if (args.mv_codec == "stored")
    cfg.mv_codec = MvCodec::stored;
  else if (args.mv_codec == "lzma")
    cfg.mv_codec = MvCodec::lzma;
  else
    throw DomainError("unknown --mv-codec value: " + args.mv_codec);
  cfg.validate();
  return cfg;
}

std::string frame_path(const std::string& prefix, size_t t, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", t);
  return prefix + buf + ext;
}

// Debug tap: the intra transform coefficients of every frame's own signal
// (not the coded residual), one CSV row per coefficient. Index 0 of a block
// is its DC; RAHT has no blocks, so its rows use block 0 and the transform's
// own coefficient order.
void dump_coeffs(const std::string& path, const std::vector<Frame>& yuv, const CodecConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw StateError("cannot open coefficient dump file: " + path);
  out << "frame,channel,block,index,value\n";
  char buf[64];
  auto row = [&](size_t t, int ch, size_t block, size_t index, double value) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%zu,%zu,%.17g\n", t, ch, block, index, value);
    out << buf;
  };
  for (size_t t = 0; t < yuv.size(); ++t) {
    if (cfg.mode == Mode::intra_raht) {
      std::vector<Vec3i> coords(yuv[t].size());
      for (size_t i = 0; i < coords.size(); ++i) coords[i] = yuv[t].voxels[i].coord;
      const Raht tf(coords, yuv[t].depth);
      for (int ch = 0; ch < 3; ++ch) {
        std::vector<double> values(yuv[t].size());
        for (size_t i = 0; i < values.size(); ++i) values[i] = yuv[t].voxels[i].attr[ch];
        const std::vector<double> coeffs = tf.forward(values);
        for (size_t i = 0; i < coeffs.size(); ++i) row(t, ch, 0, i, coeffs[i]);
      }
    } else {
      const std::vector<Block> blocks = partition(yuv[t], cfg.block_size);
      const Ragft1 tf(yuv[t], blocks);
      for (int ch = 0; ch < 3; ++ch) {
        std::vector<double> values(yuv[t].size());
        for (size_t i = 0; i < values.size(); ++i) values[i] = yuv[t].voxels[i].attr[ch];
        const CoefficientPlan plan = tf.forward(values);
        for (size_t b = 0; b < blocks.size(); ++b) {
          row(t, ch, b, 0, plan.dc[b]);
          for (size_t i = 0; i < plan.ac[b].size(); ++i) row(t, ch, b, i + 1, plan.ac[b][i]);
        }
      }
    }
  }
  if (!out) throw StateError("failed writing coefficient dump: " + path);
}

int cmd_encode(const SequenceArgs& seq_args, const CodecArgs& codec_args,
               const std::string& out_path, const std::string& mv_in,
               const std::string& mv_out, const std::string& dump_path) {
  const std::vector<Frame> frames = load_sequence(seq_args);
  CodecConfig cfg = to_config(codec_args);

  if (!mv_in.empty()) {
    cfg.imported_mvs.resize(frames.size());
    for (size_t t = 0; t < frames.size(); ++t) {
      const bool intra = !mode_is_inter(cfg.mode) || t % size_t(cfg.gop) == 0;
      if (intra) continue;
      const std::string path = frame_path(mv_in, t, ".txt");
      if (std::filesystem::exists(path)) cfg.imported_mvs[t] = read_mv_file(path);
    }
  }

  const EncodeResult result = encode_sequence(frames, cfg);
  save_bitstream(out_path, result.stream);

  if (!mv_out.empty()) {
    for (size_t t = 0; t < frames.size(); ++t)
      if (!result.mv_maps[t].empty())
        write_mv_file(frame_path(mv_out, t, ".txt"), result.mv_maps[t]);
  }

  std::vector<Frame> yuv;
  for (const Frame& f : frames)
    yuv.push_back(f.color_space == ColorSpace::RGB ? rgb_to_yuv(f) : f);
  if (!dump_path.empty()) dump_coeffs(dump_path, yuv, cfg);
  std::vector<size_t> bits, voxels;
  size_t mv_bits = 0, empty_windows = 0, missing = 0;
  for (const FrameStats& st : result.stats) {
    bits.push_back(st.payload_bits);
    voxels.push_back(st.voxel_count);
    mv_bits += st.mv_bits;
    empty_windows += st.empty_windows;
    missing += st.missing_mv;
  }
  std::printf("frames:        %zu\n", frames.size());
  std::printf("mode:          %s\n", mode_name(cfg.mode));
  std::printf("step:          %g\n", cfg.step);
  std::printf("bpv:           %.6g\n", bpv(bits, voxels));
  std::printf("psnr_y:        %.6g dB\n", psnr_y(yuv, result.recons));
  std::printf("psnr_u:        %.6g dB\n", psnr_channel(yuv, result.recons, 1));
  std::printf("psnr_v:        %.6g dB\n", psnr_channel(yuv, result.recons, 2));
  std::printf("mv_bits:       %zu\n", mv_bits);
  std::printf("empty_windows: %zu\n", empty_windows);
  if (missing) std::printf("warning: %zu blocks lacked imported MVs, used (0,0,0)\n", missing);
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int cmd_decode(const SequenceArgs& seq_args, const std::string& stream_path,
               const std::string& out_prefix, double rho) {
  const Bitstream bs = load_bitstream(stream_path);
  std::vector<Frame> geometry = load_sequence(seq_args);
  for (Frame& f : geometry)
    if (f.depth != bs.header.depth)
      f = make_frame(std::move(f.voxels), bs.header.depth, f.color_space);
  const std::vector<Frame> recons = decode_sequence(bs, geometry, rho);
  for (size_t t = 0; t < recons.size(); ++t)
    save_ply(frame_path(out_prefix, t, ".ply"), yuv_to_rgb(recons[t]));
  std::printf("decoded %zu frames to %s*.ply\n", recons.size(), out_prefix.c_str());
  return 0;
}

int cmd_metrics(const SequenceArgs& orig_args, const std::vector<std::string>& recon_paths) {
  std::vector<Frame> originals = load_sequence(orig_args);
  std::vector<Frame> recons;
  recons.reserve(recon_paths.size());
  for (const std::string& p : recon_paths) recons.push_back(load_ply(p));
  int depth = 0;
  for (const Frame& f : originals) depth = std::max(depth, f.depth);
  for (const Frame& f : recons) depth = std::max(depth, f.depth);
  auto lift = [&](std::vector<Frame>& fs) {
    for (Frame& f : fs)
      if (f.depth != depth) f = make_frame(std::move(f.voxels), depth, f.color_space);
  };
  lift(originals);
  lift(recons);
  for (Frame& f : originals)
    if (f.color_space == ColorSpace::RGB) f = rgb_to_yuv(f);
  for (Frame& f : recons)
    if (f.color_space == ColorSpace::RGB) f = rgb_to_yuv(f);
  std::printf("psnr_y: %.6g dB\n", psnr_y(originals, recons));
  std::printf("psnr_u: %.6g dB\n", psnr_channel(originals, recons, 1));
  std::printf("psnr_v: %.6g dB\n", psnr_channel(originals, recons, 2));
  return 0;
}

int cmd_synth(const std::string& kind, int frames, int grid, uint64_t seed,
              const std::string& out_prefix) {
  const std::vector<Frame> seq = synth_sequence(synth_kind_from_name(kind), frames, grid, seed);
  for (size_t t = 0; t < seq.size(); ++t) save_ply(frame_path(out_prefix, t, ".ply"), seq[t]);
  std::printf("wrote %zu frames to %s*.ply\n", seq.size(), out_prefix.c_str());
  return 0;
}

int cmd_sweep(const SequenceArgs& seq_args, const CodecArgs& codec_args,
              const std::vector<std::string>& mode_names, const std::vector<double>& steps,
              const std::string& anchor_name, const std::string& out_path) {
  const std::vector<Frame> frames = load_sequence(seq_args);
  const CodecConfig base = to_config(codec_args);
  std::vector<Mode> modes;
  for (const std::string& name : mode_names) modes.push_back(mode_from_name(name));
  std::optional<Mode> anchor;
  if (!anchor_name.empty()) anchor = mode_from_name(anchor_name);
  const SweepReport report = rd_sweep(frames, modes, steps, base, anchor);
  if (out_path.empty()) {
    std::fputs(report.csv.c_str(), stdout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw StateError("cannot open report file: " + out_path);
    out << report.csv;
    std::printf("wrote %s\n", out_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic voxel-cloud color codec with fractional-voxel motion"};
  app.require_subcommand(1);

  // encode
  SequenceArgs enc_seq;
  CodecArgs enc_codec;
  std::string enc_out = "out.pcvc", enc_mv_in, enc_mv_out;
  CLI::App* enc = app.add_subcommand("encode", "compress a frame sequence");
  add_sequence_flags(enc, enc_seq);
  add_codec_flags(enc, enc_codec);
  enc->add_option("--out,-o", enc_out, "output stream path");
  enc->add_option("--mv-in", enc_mv_in, "import integer MVs from <prefix>NNNN.txt");
  enc->add_option("--mv-out", enc_mv_out, "export chosen integer MVs to <prefix>NNNN.txt");
  std::string enc_dump;
  enc->add_option("--dump-coeffs", enc_dump,
                  "write per-frame intra transform coefficients to a CSV (debug)");

  // decode
  SequenceArgs dec_seq;
  std::string dec_stream, dec_out = "recon_";
  double dec_rho = kDefaultRho;
  CLI::App* dec = app.add_subcommand("decode", "decompress a stream against its geometry");
  add_sequence_flags(dec, dec_seq);
  dec->add_option("--stream,-s", dec_stream, "input stream path")->required();
  dec->add_option("--out,-o", dec_out, "output PLY prefix");
  dec->add_option("--rho", dec_rho, "super-resolution pairing radius (match the encoder)");

  // metrics
  SequenceArgs met_seq;
  std::vector<std::string> met_recons;
  CLI::App* met = app.add_subcommand("metrics", "PSNR between originals and reconstructions");
  add_sequence_flags(met, met_seq);
  met->add_option("--recon,-r", met_recons, "reconstructed PLY frames")->required();

  // synth
  std::string syn_kind = "half-voxel-shift", syn_out = "synth_";
  int syn_frames = 8, syn_grid = 64;
  uint64_t syn_seed = 1;
  CLI::App* syn = app.add_subcommand("synth", "generate a synthetic test sequence");
  syn->add_option("--kind,-k", syn_kind,
                  "translating-texture-plane | rotating-shell | half-voxel-shift");
  syn->add_option("--frames", syn_frames)->check(CLI::PositiveNumber);
  syn->add_option("--grid", syn_grid);
  syn->add_option("--seed", syn_seed);
  syn->add_option("--out,-o", syn_out, "output PLY prefix");

  // sweep
  SequenceArgs swp_seq;
  CodecArgs swp_codec;
  std::vector<std::string> swp_modes = {"intra-ragft", "intra-raht", "dm",
                                        "dm-rf",       "dm-rf-sr",   "fvme"};
  std::vector<double> swp_steps = {4.0, 8.0, 16.0, 32.0, 64.0};
  std::string swp_anchor, swp_out;
  CLI::App* swp = app.add_subcommand("sweep", "rate-distortion sweep over modes and steps");
  add_sequence_flags(swp, swp_seq);
  add_codec_flags(swp, swp_codec);
  swp->add_option("--modes", swp_modes, "modes to sweep");
  swp->add_option("--steps", swp_steps, "quantization steps to sweep");
  swp->add_option("--anchor", swp_anchor, "anchor mode for the BD-rate table");
  swp->add_option("--out,-o", swp_out, "CSV output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (enc->parsed())
      return cmd_encode(enc_seq, enc_codec, enc_out, enc_mv_in, enc_mv_out, enc_dump);
    if (dec->parsed()) return cmd_decode(dec_seq, dec_stream, dec_out, dec_rho);
    if (met->parsed()) return cmd_metrics(met_seq, met_recons);
    if (syn->parsed()) return cmd_synth(syn_kind, syn_frames, syn_grid, syn_seed, syn_out);
    if (swp->parsed()) return cmd_sweep(swp_seq, swp_codec, swp_modes, swp_steps, swp_anchor,
                                        swp_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
