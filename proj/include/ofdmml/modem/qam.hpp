#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/numerics/matrix.hpp"

namespace ofdmml {

using Bits = std::vector<std::uint8_t>;

/// M-QAM point table with unit average energy. Point i carries the label
/// whose bits, most significant first, spell i in binary.
class QamConstellation {
 public:
  explicit QamConstellation(int order) : order_(order) {
    switch (order) {
      case 4: build_square(1); break;
      case 16: build_square(2); break;
      case 32: build_cross32(); break;
      default:
        throw std::invalid_argument("QamConstellation: unsupported order " + std::to_string(order) +
                                    " (expected 4, 16 or 32)");
    }
    normalise();
  }

  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] int bits_per_symbol() const noexcept { return std::countr_zero(static_cast<unsigned>(order_)); }
  [[nodiscard]] std::span<const cplx> points() const noexcept { return points_; }
  [[nodiscard]] cplx point(std::size_t label) const { return points_.at(label); }

  /// Minimum distance between distinct points.
  [[nodiscard]] double min_distance() const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i)
      for (std::size_t j = i + 1; j < points_.size(); ++j) d = std::min(d, std::abs(points_[i] - points_[j]));
    return d;
  }

  /// Index of the nearest point; ties go to the lowest index.
  [[nodiscard]] std::size_t nearest(cplx y) const noexcept {
    std::size_t best = 0;
    double best_d = std::norm(y - points_[0]);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double d = std::norm(y - points_[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

 private:
  // Gray code of v.
  static unsigned gray(unsigned v) { return v ^ (v >> 1); }

  // Square constellation with `half` bits per axis; the first `half` label bits
  // select the in-phase level and the rest the quadrature level, Gray coded.
  void build_square(int half) {
    const unsigned levels = 1u << half;
    points_.assign(static_cast<std::size_t>(order_), {});
    for (unsigned li = 0; li < levels; ++li) {
      for (unsigned lq = 0; lq < levels; ++lq) {
        const double re = 2.0 * li - (levels - 1.0);
        const double im = 2.0 * lq - (levels - 1.0);
        // Gray labels map increasing level index to adjacent codes.
        const unsigned label = (gray(li) << half) | gray(lq);
        points_[label] = {re, im};
      }
    }
  }

  // 32-point cross: start from an 8 x 4 Gray rectangle (3 in-phase bits, 2
  // quadrature bits) and fold the outer columns (|I| = 7) onto rows |Q| = 5.
  void build_cross32() {
    points_.assign(32, {});
    for (unsigned li = 0; li < 8; ++li) {
      for (unsigned lq = 0; lq < 4; ++lq) {
        double re = 2.0 * li - 7.0;
        double im = 2.0 * lq - 3.0;
        if (std::abs(re) == 7.0) {
          const double folded_re = std::copysign(4.0 - std::abs(im), re);
          const double folded_im = std::copysign(5.0, im);
          re = folded_re;
          im = folded_im;
        }
        const unsigned label = (gray(li) << 2) | gray(lq);
        points_[label] = {re, im};
      }
    }
  }

  void normalise() {
    double e = 0.0;
    for (const auto& p : points_) e += std::norm(p);
    e /= static_cast<double>(points_.size());
    const double s = 1.0 / std::sqrt(e);
    for (auto& p : points_) p *= s;
  }

  int order_;
  CVec points_;
};

/// Maps bit groups (MSB first) to constellation points.
inline CVec map_bits(std::span<const std::uint8_t> bits, const QamConstellation& c) {
  const auto k = static_cast<std::size_t>(c.bits_per_symbol());
  if (bits.size() % k != 0) {
    throw std::invalid_argument("map_bits: " + std::to_string(bits.size()) +
                                " bits is not a multiple of " + std::to_string(k));
  }
  CVec out(bits.size() / k);
  for (std::size_t s = 0; s < out.size(); ++s) {
    std::size_t label = 0;
    for (std::size_t b = 0; b < k; ++b) label = (label << 1) | (bits[s * k + b] & 1u);
    out[s] = c.point(label);
  }
  return out;
}

inline void append_label_bits(std::size_t label, int k, Bits& out) {
  for (int b = k - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((label >> b) & 1u));
}

/// Hard nearest-point decisions, ties to the lowest constellation index.
inline Bits demap_symbols(std::span<const cplx> y, const QamConstellation& c) {
  Bits out;
  out.reserve(y.size() * static_cast<std::size_t>(c.bits_per_symbol()));
  for (const auto& v : y) append_label_bits(c.nearest(v), c.bits_per_symbol(), out);
  return out;
}

/// Bit-level constants (alpha_M, beta_M) for the nearest-neighbour
/// approximation BER ~ alpha_M Q(sqrt(beta_M * snr)) with Gray labelling:
/// square M-QAM uses alpha = 4(1 - 1/sqrt(M)) / log2 M, beta = 3/(M - 1);
/// the 32-point cross uses alpha = 4 / log2 M, beta = 3/(M - 1).
struct BerConstants {
  double alpha;
  double beta;
};

inline BerConstants ber_constants(int order) {
  const double m = order;
  const double k = std::log2(m);
  switch (order) {
    case 4:
    case 16: return {4.0 * (1.0 - 1.0 / std::sqrt(m)) / k, 3.0 / (m - 1.0)};
    case 32: return {4.0 / k, 3.0 / (m - 1.0)};
    default: throw std::invalid_argument("ber_constants: unsupported order " + std::to_string(order));
  }
}

}  // namespace ofdmml
