#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/modem/pilots.hpp"
#include "ofdmml/modem/qam.hpp"
#include "ofdmml/numerics/dft.hpp"

namespace ofdmml {

/// What the non-pilot subcarriers of a comb-type pilot symbol carry.
enum class GapFill { zero, data };

/// Shape of one coherence-block frame: a pilot OFDM symbol followed by
/// `data_symbols` data OFDM symbols, each prefixed by a cyclic prefix of
/// round(cp_fraction * subcarriers) samples.
struct FrameLayout {
  std::size_t subcarriers = 64;
  std::size_t data_symbols = 1;
  double cp_fraction = 0.25;
  GapFill gap_fill = GapFill::zero;

  [[nodiscard]] std::size_t cp_length() const {
    if (cp_fraction < 0.0 || cp_fraction > 1.0) {
      throw std::invalid_argument("FrameLayout: cyclic prefix fraction " + std::to_string(cp_fraction) +
                                  " outside [0, 1]");
    }
    return static_cast<std::size_t>(std::lround(cp_fraction * static_cast<double>(subcarriers)));
  }
  [[nodiscard]] std::size_t symbol_length() const { return subcarriers + cp_length(); }
  [[nodiscard]] std::size_t symbols() const noexcept { return 1 + data_symbols; }
  [[nodiscard]] std::size_t time_length() const { return symbols() * symbol_length(); }
};

struct GridPos {
  std::size_t symbol;
  std::size_t subcarrier;
};

/// Grid positions that carry payload, in transmission order.
inline std::vector<GridPos> payload_positions(const FrameLayout& layout, const PilotPattern& pattern) {
  std::vector<GridPos> out;
  if (layout.gap_fill == GapFill::data) {
    for (auto k : pattern.data_indices()) out.push_back({0, k});
  }
  for (std::size_t s = 1; s < layout.symbols(); ++s)
    for (std::size_t k = 0; k < layout.subcarriers; ++k) out.push_back({s, k});
  return out;
}

/// Frequency-domain grid (symbols x subcarriers) plus the payload it carries.
struct OfdmFrame {
  FrameLayout layout;
  CMat grid;
  Bits bits;
};

inline OfdmFrame build_frame(std::span<const std::uint8_t> bits, const PilotPattern& pattern,
                             const QamConstellation& c, const FrameLayout& layout) {
  if (pattern.subcarriers() != layout.subcarriers) {
    throw std::invalid_argument("build_frame: pilot pattern and layout disagree on subcarrier count");
  }
  (void)layout.cp_length();  // validates the fraction
  const auto positions = payload_positions(layout, pattern);
  const auto k = static_cast<std::size_t>(c.bits_per_symbol());
  if (bits.size() != positions.size() * k) {
    throw std::invalid_argument("build_frame: expected " + std::to_string(positions.size() * k) +
                                " payload bits, got " + std::to_string(bits.size()));
  }
  OfdmFrame f{layout, CMat(layout.symbols(), layout.subcarriers), Bits(bits.begin(), bits.end())};
  const CVec pv = pattern.pilot_values();
  for (std::size_t i = 0; i < pv.size(); ++i) f.grid(0, pattern.pilot_indices()[i]) = pv[i];
  const CVec syms = map_bits(bits, c);
  for (std::size_t i = 0; i < positions.size(); ++i) f.grid(positions[i].symbol, positions[i].subcarrier) = syms[i];
  return f;
}

/// IDFT of one frequency-domain symbol with its last `cp` samples prepended.
inline CVec ofdm_symbol_time(std::span<const cplx> freq, std::size_t cp) {
  if (cp > freq.size()) {
    throw std::invalid_argument("ofdm_symbol_time: cyclic prefix longer than the symbol");
  }
  const CVec t = idft(freq);
  CVec out;
  out.reserve(t.size() + cp);
  out.insert(out.end(), t.end() - static_cast<std::ptrdiff_t>(cp), t.end());
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

inline CVec to_time_domain(const OfdmFrame& f) {
  const std::size_t cp = f.layout.cp_length();
  CVec out;
  out.reserve(f.layout.time_length());
  for (std::size_t s = 0; s < f.grid.rows(); ++s) {
    const CVec sym = ofdm_symbol_time(f.grid.row(s), cp);
    out.insert(out.end(), sym.begin(), sym.end());
  }
  return out;
}

/// Drops each symbol's cyclic prefix and applies the DFT. `y` must hold at
/// least layout.time_length() samples; extra trailing samples are ignored.
inline CMat strip_cp_and_dft(std::span<const cplx> y, const FrameLayout& layout) {
  const std::size_t cp = layout.cp_length();
  const std::size_t len = layout.symbol_length();
  if (y.size() < layout.time_length()) {
    throw std::invalid_argument("strip_cp_and_dft: " + std::to_string(y.size()) +
                                " samples, frame needs " + std::to_string(layout.time_length()));
  }
  CMat grid(layout.symbols(), layout.subcarriers);
  for (std::size_t s = 0; s < layout.symbols(); ++s) {
    const CVec freq = dft(y.subspan(s * len + cp, layout.subcarriers));
    std::copy(freq.begin(), freq.end(), grid.row(s).begin());
  }
  return grid;
}

}  // namespace ofdmml
