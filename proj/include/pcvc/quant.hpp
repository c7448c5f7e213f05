#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pcvc/errors.hpp"

namespace pcvc {

// Uniform scalar quantizer, rounding half away from zero so residual
// symbols stay symmetric around 0.
inline std::vector<int32_t> quantize(std::span<const double> coeffs, double step) {
  if (!(step > 0.0)) throw DomainError("quantization step must be positive");
  std::vector<int32_t> q(coeffs.size());
  for (size_t i = 0; i < coeffs.size(); ++i) {
    const long long v = std::llround(coeffs[i] / step);
    if (v < std::numeric_limits<int32_t>::min() || v > std::numeric_limits<int32_t>::max())
      throw DomainError("quantized coefficient exceeds 32-bit range");
    q[i] = int32_t(v);
  }
  return q;
}

inline std::vector<double> dequantize(std::span<const int32_t> q, double step) {
  if (!(step > 0.0)) throw DomainError("quantization step must be positive");
  std::vector<double> c(q.size());
  for (size_t i = 0; i < q.size(); ++i) c[i] = double(q[i]) * step;
  return c;
}

}  // namespace pcvc
