#pragma once

#include <cstdint>
#include <lzma.h>
#include <span>
#include <string>
#include <vector>

#include "pcvc/errors.hpp"

namespace pcvc {

// Pluggable general-purpose compressor for MV sections. Id 0 (stored) has no
// external dependency and always round-trips; id 1 wraps liblzma with the
// .xz container so corrupt sections fail checksum verification.
enum class MvCodec : uint8_t { stored = 0, lzma = 1 };

inline MvCodec mv_codec_from_id(uint8_t id) {
  if (id > 1) throw ParseError("unknown MV codec id " + std::to_string(int(id)));
  return MvCodec(id);
}

inline std::vector<uint8_t> byte_compress(MvCodec codec, std::span<const uint8_t> data) {
  if (codec == MvCodec::stored) return {data.begin(), data.end()};
  static constexpr uint8_t kEmpty = 0;
  std::vector<uint8_t> out(lzma_stream_buffer_bound(data.size()));
  size_t out_pos = 0;
  const lzma_ret rc =
      lzma_easy_buffer_encode(6, LZMA_CHECK_CRC32, nullptr,
                              data.empty() ? &kEmpty : data.data(), data.size(), out.data(),
                              &out_pos, out.size());
  if (rc != LZMA_OK) throw StateError("lzma compression failed, code " + std::to_string(rc));
  out.resize(out_pos);
  return out;
}

inline std::vector<uint8_t> byte_decompress(MvCodec codec, std::span<const uint8_t> data,
                                            size_t expected_size) {
  if (codec == MvCodec::stored) {
    if (data.size() != expected_size) throw CorruptionError("stored section size mismatch");
    return {data.begin(), data.end()};
  }
  std::vector<uint8_t> out(expected_size + 1);  // keep out.data() valid for size 0
  uint64_t memlimit = UINT64_MAX;
  size_t in_pos = 0, out_pos = 0;
  const lzma_ret rc =
      lzma_stream_buffer_decode(&memlimit, 0, nullptr, data.data(), &in_pos, data.size(),
                                out.data(), &out_pos, expected_size);
  if (rc != LZMA_OK || in_pos != data.size() || out_pos != expected_size)
    throw CorruptionError("lzma section failed to decompress to the expected size");
  out.resize(expected_size);
  return out;
}

}  // namespace pcvc
