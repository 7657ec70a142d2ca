#pragma once

#include <span>
#include <stdexcept>

#include "ofdmml/numerics/matrix.hpp"

namespace ofdmml {

/// Linear convolution; output length |x| + |h| - 1.
inline CVec conv(std::span<const cplx> x, std::span<const cplx> h) {
  if (x.empty() || h.empty()) throw std::invalid_argument("conv: empty input");
  CVec y(x.size() + h.size() - 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
  }
  count(Op::complex_mul, x.size() * h.size());
  count(Op::complex_add, x.size() * h.size());
  return y;
}

/// Circular convolution over length |x|; h is zero-padded (or wrapped) to |x|.
inline CVec circular_conv(std::span<const cplx> x, std::span<const cplx> h) {
  if (x.empty() || h.empty()) throw std::invalid_argument("circular_conv: empty input");
  const std::size_t n = x.size();
  CVec y(n);
  for (std::size_t j = 0; j < h.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) y[(i + j) % n] += x[i] * h[j];
  }
  count(Op::complex_mul, n * h.size());
  count(Op::complex_add, n * h.size());
  return y;
}

}  // namespace ofdmml
