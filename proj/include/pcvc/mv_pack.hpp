#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/motion.hpp"
#include "pcvc/rlgr.hpp"

namespace pcvc {

// One block's motion side information.
struct MVRecord {
  IntegerMV iv;
  std::optional<FractionalMV> fv;
};

// Fixed-budget MV packing: 15 bits per integer MV (per axis, x then y then
// z: 4 magnitude bits then a sign bit, zero encoded as +0) plus, when the
// records carry fractional MVs, 8 bits holding the canonical FvMV index.
// Blocks follow scan order; the bit string is padded to a byte boundary
// once, after the last block.
inline std::vector<uint8_t> pack_mvs(std::span<const MVRecord> records) {
  const bool fractional = !records.empty() && records[0].fv.has_value();
  BitWriter bw;
  for (const MVRecord& rec : records) {
    if (rec.fv.has_value() != fractional)
      throw DomainError("mixed fractional/integer MV records in one frame");
    const Vec3i d = rec.iv.vec();
    for (int a = 0; a < 3; ++a) {
      const int mag = std::abs(d[a]);
      if (mag > 15) throw DomainError("integer MV magnitude exceeds 4 bits");
      bw.put_bits(uint64_t(mag), 4);
      bw.put_bit(d[a] < 0 ? 1 : 0);
    }
    if (fractional) bw.put_bits(uint64_t(rec.fv->index()), 8);
  }
  return bw.take();
}

inline std::vector<MVRecord> unpack_mvs(std::span<const uint8_t> bytes, size_t block_count,
                                        bool fractional) {
  const size_t bits_per_block = fractional ? 23 : 15;
  const size_t need = (block_count * bits_per_block + 7) / 8;
  if (bytes.size() != need)
    throw CorruptionError("mv section size mismatch: expected " + std::to_string(need) +
                          " bytes, got " + std::to_string(bytes.size()));
  BitReader br(bytes);
  std::vector<MVRecord> records(block_count);
  for (MVRecord& rec : records) {
    Vec3i d;
    for (int a = 0; a < 3; ++a) {
      const int mag = int(br.get_bits(4));
      const int sign = int(br.get_bit());
      d[a] = sign ? -mag : mag;
    }
    rec.iv = IntegerMV(d);
    if (fractional) {
      const int idx = int(br.get_bits(8));
      if (idx > 26) throw CorruptionError("fractional MV index out of range");
      rec.fv = FractionalMV::from_index(idx);
    }
  }
  return records;
}

}  // namespace pcvc
