#pragma once

#include <bit>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "ofdmml/numerics/matrix.hpp"

namespace ofdmml {

// Unitary convention in both directions:
//   X[k] = N^{-1/2} sum_n x[n] e^{-j 2 pi k n / N}
//   x[n] = N^{-1/2} sum_k X[k] e^{+j 2 pi k n / N}
// so Parseval holds exactly and a length-N circular convolution maps to
// sqrt(N) * dft(x) * dft(h).

namespace detail {

/// Forward twiddles e^{-j 2 pi k / n}, k < n/2, cached per thread for the last length used.
inline const CVec& twiddles(std::size_t n) {
  thread_local CVec table;
  thread_local std::size_t table_n = 0;
  if (table_n != n) {
    table.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      table[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(n));
    }
    table_n = n;
  }
  return table;
}

inline void fft_radix2_inplace(CVec& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const CVec& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx tw = inverse ? std::conj(w[k * stride]) : w[k * stride];
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * tw;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  const auto stages = static_cast<std::uint64_t>(std::countr_zero(n));
  count(Op::complex_mul, stages * (n / 2));
  count(Op::complex_add, stages * n);
}

inline CVec dft_direct(std::span<const cplx> x, bool inverse) {
  const std::size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  CVec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{};
    for (std::size_t t = 0; t < n; ++t) {
      // (k*t) mod n keeps the phase argument small for long transforms.
      const auto idx = static_cast<double>((k * t) % n);
      acc += x[t] * std::polar(1.0, sign * 2.0 * std::numbers::pi * idx / static_cast<double>(n));
    }
    out[k] = acc;
  }
  count(Op::complex_mul, n * n);
  count(Op::complex_add, n * (n - 1));
  return out;
}

inline CVec transform(std::span<const cplx> x, bool inverse) {
  if (x.empty()) throw std::invalid_argument("dft: empty input");
  const std::size_t n = x.size();
  CVec out;
  if (std::has_single_bit(n)) {
    out.assign(x.begin(), x.end());
    fft_radix2_inplace(out, inverse);
  } else {
    out = dft_direct(x, inverse);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : out) v *= scale;
  count(Op::real_mul, 2 * n);
  return out;
}

}  // namespace detail

inline CVec dft(std::span<const cplx> x) { return detail::transform(x, false); }
inline CVec idft(std::span<const cplx> x) { return detail::transform(x, true); }

}  // namespace ofdmml
