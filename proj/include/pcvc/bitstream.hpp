#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcvc/byte_codec.hpp"
#include "pcvc/errors.hpp"

namespace pcvc {

// Coding scheme selector, stored in the stream header.
enum class Mode : uint8_t {
  intra_ragft = 0,  // every frame intra, single-level RA-GFT
  intra_raht = 1,   // every frame intra, RAHT
  dm = 2,           // integer MV search only
  dm_rf = 3,        // + local refinement
  dm_rf_sr = 4,     // refined MV against the super-resolved reference
  fvme = 5,         // + fractional MV refinement
};

inline Mode mode_from_id(uint8_t id) {
  if (id > 5) throw ParseError("unknown mode id " + std::to_string(int(id)));
  return Mode(id);
}

inline bool mode_is_inter(Mode m) { return m >= Mode::dm; }
inline bool mode_uses_superres(Mode m) { return m == Mode::dm_rf_sr || m == Mode::fvme; }
inline bool mode_uses_fractional(Mode m) { return m == Mode::fvme; }
inline bool mode_uses_refine(Mode m) { return m >= Mode::dm_rf; }

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::intra_ragft: return "intra-ragft";
    case Mode::intra_raht: return "intra-raht";
    case Mode::dm: return "dm";
    case Mode::dm_rf: return "dm-rf";
    case Mode::dm_rf_sr: return "dm-rf-sr";
    case Mode::fvme: return "fvme";
  }
  return "?";
}

struct StreamHeader {
  uint8_t version = 1;
  uint8_t depth = 0;
  uint8_t block_size = 16;
  uint8_t gop = 32;
  Mode mode = Mode::fvme;
  MvCodec mv_codec = MvCodec::stored;
  double step = 1.0;
  uint32_t frame_count = 0;
};

struct ChannelPayload {
  uint32_t dc_count = 0;
  std::vector<uint8_t> dc_bytes;  // RLGR bits, padded to bytes
  uint32_t ac_count = 0;
  std::vector<uint8_t> ac_bytes;
};

struct FramePayload {
  uint32_t voxel_count = 0;
  std::optional<std::vector<uint8_t>> mv_bytes;  // absent on intra frames
  std::array<ChannelPayload, 3> channels;        // Y, U, V
};

struct Bitstream {
  StreamHeader header;
  std::vector<FramePayload> frames;
};

inline constexpr char kMagic[4] = {'P', 'C', 'V', 'C'};

// Byte size of one frame's payload as serialized; 8x this is the b_t of the
// rate metrics (header bytes are not attributed to frames).
inline size_t frame_payload_bytes(const FramePayload& f) {
  size_t n = 4;  // voxel_count
  if (f.mv_bytes) n += 4 + f.mv_bytes->size();
  for (const ChannelPayload& ch : f.channels)
    n += 4 + 4 + ch.dc_bytes.size() + 4 + 4 + ch.ac_bytes.size();
  return n;
}

namespace bitstream_detail {

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 24));
}

inline void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(uint8_t(bits >> (8 * i)));
}

class Cursor {
public:
  Cursor(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | data_[pos_ + i];
    pos_ += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::vector<uint8_t> bytes(size_t n) {
    need(n);
    std::vector<uint8_t> v(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return v;
  }

  size_t remaining() const { return data_.size() - pos_; }

private:
  void need(size_t n) const {
    if (data_.size() - pos_ < n) throw CorruptionError("truncated stream section");
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace bitstream_detail

inline std::vector<uint8_t> write_bitstream(const Bitstream& bs) {
  using namespace bitstream_detail;
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(bs.header.version);
  out.push_back(bs.header.depth);
  out.push_back(bs.header.block_size);
  out.push_back(bs.header.gop);
  out.push_back(uint8_t(bs.header.mode));
  out.push_back(uint8_t(bs.header.mv_codec));
  put_f64(out, bs.header.step);
  put_u32(out, bs.header.frame_count);

  if (bs.header.frame_count != bs.frames.size())
    throw DomainError("frame_count does not match payload list");
  for (size_t t = 0; t < bs.frames.size(); ++t) {
    const FramePayload& f = bs.frames[t];
    const bool want_mv = mode_is_inter(bs.header.mode) && bs.header.gop > 0 &&
                         t % bs.header.gop != 0;
    if (want_mv != f.mv_bytes.has_value())
      throw DomainError("mv section presence inconsistent with mode/gop at frame " +
                        std::to_string(t));
    put_u32(out, f.voxel_count);
    if (f.mv_bytes) {
      put_u32(out, uint32_t(f.mv_bytes->size()));
      out.insert(out.end(), f.mv_bytes->begin(), f.mv_bytes->end());
    }
    for (const ChannelPayload& ch : f.channels) {
      put_u32(out, ch.dc_count);
      put_u32(out, uint32_t(ch.dc_bytes.size()));
      out.insert(out.end(), ch.dc_bytes.begin(), ch.dc_bytes.end());
      put_u32(out, ch.ac_count);
      put_u32(out, uint32_t(ch.ac_bytes.size()));
      out.insert(out.end(), ch.ac_bytes.begin(), ch.ac_bytes.end());
    }
  }
  return out;
}

inline Bitstream read_bitstream(std::span<const uint8_t> data) {
  using namespace bitstream_detail;
  Cursor cur(data);
  Bitstream bs;
  for (char c : kMagic)
    if (cur.u8() != uint8_t(c)) throw ParseError("bad container magic");
  bs.header.version = cur.u8();
  if (bs.header.version != 1)
    throw ParseError("unsupported container version " + std::to_string(int(bs.header.version)));
  bs.header.depth = cur.u8();
  bs.header.block_size = cur.u8();
  bs.header.gop = cur.u8();
  bs.header.mode = mode_from_id(cur.u8());
  bs.header.mv_codec = mv_codec_from_id(cur.u8());
  bs.header.step = cur.f64();
  bs.header.frame_count = cur.u32();
  if (bs.header.gop == 0) throw ParseError("gop must be at least 1");

  bs.frames.resize(bs.header.frame_count);
  for (size_t t = 0; t < bs.frames.size(); ++t) {
    FramePayload& f = bs.frames[t];
    f.voxel_count = cur.u32();
    if (mode_is_inter(bs.header.mode) && t % bs.header.gop != 0)
      f.mv_bytes = cur.bytes(cur.u32());
    for (ChannelPayload& ch : f.channels) {
      ch.dc_count = cur.u32();
      ch.dc_bytes = cur.bytes(cur.u32());
      ch.ac_count = cur.u32();
      ch.ac_bytes = cur.bytes(cur.u32());
    }
  }
  if (cur.remaining() != 0) throw CorruptionError("trailing bytes after last frame");
  return bs;
}

inline void save_bitstream(const std::string& path, const Bitstream& bs) {
  const std::vector<uint8_t> bytes = write_bitstream(bs);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StateError("cannot open output stream file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw StateError("failed writing stream file: " + path);
}

inline Bitstream load_bitstream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StateError("cannot open stream file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_bitstream(bytes);
}

}  // namespace pcvc
