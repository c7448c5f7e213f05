#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pcvc/errors.hpp"

namespace pcvc {

// MSB-first bit writer over a growing byte buffer.
class BitWriter {
public:
  void put_bit(uint32_t b) {
    if (bit_ == 0) bytes_.push_back(0);
    if (b & 1) bytes_.back() |= uint8_t(0x80u >> bit_);
    bit_ = (bit_ + 1) & 7;
  }

  // n most significant-first bits of v, n <= 64.
  void put_bits(uint64_t v, int n) {
    for (int i = n - 1; i >= 0; --i) put_bit(uint32_t(v >> i) & 1u);
  }

  uint64_t bit_count() const { return bytes_.empty() ? 0 : (bytes_.size() - 1) * 8 + (bit_ ? bit_ : 8); }
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> take() { return std::move(bytes_); }

private:
  std::vector<uint8_t> bytes_;
  unsigned bit_ = 0;  // bits used in the last byte, 0 meaning byte boundary
};

// MSB-first bit reader; overrunning the buffer raises CorruptionError.
class BitReader {
public:
  BitReader(std::span<const uint8_t> data) : data_(data) {}

  uint32_t get_bit() {
    const uint64_t byte = pos_ >> 3;
    if (byte >= data_.size()) throw CorruptionError("bit stream overrun");
    const uint32_t b = (data_[byte] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return b;
  }

  uint64_t get_bits(int n) {
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | get_bit();
    return v;
  }

  uint64_t consumed() const { return pos_; }

private:
  std::span<const uint8_t> data_;
  uint64_t pos_ = 0;
};

// Adaptive run-length Golomb-Rice coder. State is held in scaled form
// (scale 16): kR_p starts at 32, kU_p at 0; the effective Rice parameter is
// kR = min(kR_p >> 4, 24) and the run parameter kU = min(kU_p >> 4, 16).
// Symbols are zigzag-mapped to non-negative u (u = 2x for x >= 0, else
// -2x - 1). With kU = 0 the coder emits plain Golomb-Rice codes; once zeros
// push kU above 0 it switches to run mode, where a full run of 2^kU zeros
// costs a single bit. A Golomb-Rice quotient >= 12 escapes to a raw 32-bit
// value so adversarial magnitudes cannot blow up the unary part.
namespace rlgr_detail {

inline constexpr int kEscapeQuotient = 12;

inline uint32_t zigzag(int32_t x) {
  return x >= 0 ? uint32_t(x) * 2u : uint32_t(-(int64_t(x)) * 2 - 1);
}

inline int32_t unzigzag(uint32_t u) {
  return (u & 1u) ? int32_t(-(int64_t(u) + 1) / 2) : int32_t(u / 2);
}

struct State {
  int64_t kr_p = 32;
  int64_t ku_p = 0;
  int kr() const { return int(std::min<int64_t>(kr_p >> 4, 24)); }
  int ku() const { return int(std::min<int64_t>(ku_p >> 4, 16)); }

  void adapt_rice(uint32_t q) {
    if (q == 0)
      kr_p = std::max<int64_t>(0, kr_p - 6);
    else if (q > 1)
      kr_p = std::min<int64_t>(384, kr_p + 4 * (int64_t(q) - 1));
  }
};

inline void put_rice(BitWriter& bw, uint32_t u, int kr) {
  const uint32_t q = u >> kr;
  if (q >= kEscapeQuotient) {
    for (int i = 0; i < kEscapeQuotient; ++i) bw.put_bit(1);
    bw.put_bits(u, 32);
  } else {
    for (uint32_t i = 0; i < q; ++i) bw.put_bit(1);
    bw.put_bit(0);
    bw.put_bits(u & ((uint64_t(1) << kr) - 1), kr);
  }
}

inline uint32_t get_rice(BitReader& br, int kr) {
  uint32_t q = 0;
  while (q < kEscapeQuotient && br.get_bit()) ++q;
  if (q >= kEscapeQuotient) return uint32_t(br.get_bits(32));
  return (q << kr) | uint32_t(br.get_bits(kr));
}

}  // namespace rlgr_detail

struct RlgrBits {
  std::vector<uint8_t> bytes;
  uint64_t bit_count = 0;
};

inline RlgrBits rlgr_encode(std::span<const int32_t> symbols) {
  using namespace rlgr_detail;
  BitWriter bw;
  State st;
  size_t i = 0;
  const size_t n = symbols.size();
  while (i < n) {
    if (st.ku() == 0) {
      const uint32_t u = zigzag(symbols[i]);
      const int kr = st.kr();
      put_rice(bw, u, kr);
      st.adapt_rice(u >> kr);
      if (u == 0) st.ku_p += 4;
      ++i;
    } else {
      const int ku = st.ku();
      const uint32_t m = uint32_t(1) << ku;
      uint32_t r = 0;
      while (r < m && i + r < n && symbols[i + r] == 0) ++r;
      if (r == m) {
        bw.put_bit(0);  // full run of m zeros
        st.ku_p += 4;
        i += r;
      } else if (i + r == n) {
        bw.put_bit(1);  // input ends inside a run: declared count stops the decoder
        bw.put_bits(r, ku);
        i += r;
      } else {
        bw.put_bit(1);
        bw.put_bits(r, ku);
        const uint32_t u = zigzag(symbols[i + r]);
        const int kr = st.kr();
        put_rice(bw, u - 1, kr);
        st.adapt_rice((u - 1) >> kr);
        st.ku_p = std::max<int64_t>(0, st.ku_p - 6);
        i += r + 1;
      }
    }
  }
  RlgrBits out;
  out.bit_count = bw.bit_count();
  out.bytes = bw.take();
  return out;
}

// Decodes exactly `count` symbols; the declared count is the framing. Returns
// the symbols and the number of bits consumed so the container can verify
// the section length (no more than 7 padding bits may remain).
inline std::pair<std::vector<int32_t>, uint64_t> rlgr_decode(std::span<const uint8_t> bytes,
                                                             size_t count) {
  using namespace rlgr_detail;
  BitReader br(bytes);
  State st;
  std::vector<int32_t> out;
  out.reserve(count);
  while (out.size() < count) {
    if (st.ku() == 0) {
      const int kr = st.kr();
      const uint32_t u = get_rice(br, kr);
      st.adapt_rice(u >> kr);
      if (u == 0) st.ku_p += 4;
      out.push_back(unzigzag(u));
    } else {
      const int ku = st.ku();
      const uint32_t m = uint32_t(1) << ku;
      if (br.get_bit() == 0) {
        if (out.size() + m > count)
          throw CorruptionError("rlgr run exceeds declared symbol count");
        out.insert(out.end(), m, 0);
        st.ku_p += 4;
      } else {
        const uint32_t r = uint32_t(br.get_bits(ku));
        if (out.size() + r > count)
          throw CorruptionError("rlgr run exceeds declared symbol count");
        out.insert(out.end(), r, 0);
        if (out.size() == count) break;  // stream ended inside a run
        const int kr = st.kr();
        const uint32_t u = get_rice(br, kr) + 1;
        st.adapt_rice((u - 1) >> kr);
        st.ku_p = std::max<int64_t>(0, st.ku_p - 6);
        out.push_back(unzigzag(u));
      }
    }
  }
  return {std::move(out), br.consumed()};
}

}  // namespace pcvc
