#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ofdmml/allocation/allocation.hpp"
#include "ofdmml/channel/channel.hpp"
#include "ofdmml/harness/config.hpp"
#include "ofdmml/modem/frame.hpp"
#include "ofdmml/modem/pilots.hpp"
#include "ofdmml/modem/qam.hpp"
#include "ofdmml/numerics/conv.hpp"
#include "ofdmml/numerics/rng.hpp"

namespace ofdmml::harness {

/// Static link parameters shared by every trial of a campaign. The observed
/// link is user 0, transmitting over all subcarriers. Users beyond the
/// block count are overlaid on block (u - blocks) and interfere there.
struct LinkSetup {
  QamConstellation constellation{4};
  PilotPattern pattern{64, 64};
  FrameLayout layout{};
  ChannelProfile profile = ChannelProfile::exponential();
  InterferenceMap imap = build_interference_map(4);

  static LinkSetup from_config(const ExperimentConfig& c) {
    c.validate();
    LinkSetup s{QamConstellation(c.modulation), PilotPattern(c.subcarriers, c.pilots),
                FrameLayout{c.subcarriers, c.data_symbols, c.cp_fraction, GapFill::zero}, c.channel.profile(),
                build_interference_map(c.users, c.subcarriers, c.subcarriers / 4)};
    return s;
  }

  [[nodiscard]] std::size_t subcarriers() const noexcept { return layout.subcarriers; }
  [[nodiscard]] std::size_t bits_per_symbol() const noexcept {
    return static_cast<std::size_t>(constellation.bits_per_symbol());
  }

  /// Overlay users whose transmissions reach the observed link.
  [[nodiscard]] std::vector<std::size_t> interferers() const {
    std::vector<std::size_t> out;
    for (std::size_t u = imap.blocks(); u < imap.users; ++u) out.push_back(u);
    return out;
  }
};

/// Receiver-side view of one coherence block after CP removal, DFT and
/// automatic gain control (division by the square root of the desired
/// user's mean receive power).
struct Reception {
  CMat rx;                      ///< symbols x subcarriers
  CVec h;                       ///< desired user's frequency response after AGC
  double noise_variance = 0.0;  ///< per subcarrier after AGC, equal to 1 / snr
};

namespace detail {

inline CVec random_symbols(const QamConstellation& c, std::size_t n, RngStream& rng) {
  CVec out(n);
  for (auto& v : out) v = c.point(rng.below(static_cast<std::uint64_t>(c.order())));
  return out;
}

inline void append_time(CVec& out, std::span<const cplx> freq, std::size_t cp) {
  const CVec t = ofdm_symbol_time(freq, cp);
  out.insert(out.end(), t.begin(), t.end());
}

}  // namespace detail

/// Sends `grid` (symbols x subcarriers) from user 0 through a fresh block
/// channel. A random data symbol precedes the frame so that a cyclic prefix
/// shorter than the channel memory produces inter-symbol interference.
/// Overlay users transmit random symbols on their own block with their own
/// path loss; noise is set from the desired user's mean receive power.
inline Reception transmit_grid(const LinkSetup& s, const CMat& grid, double snr_db, RngStream& rng) {
  const std::size_t n = s.subcarriers();
  if (grid.cols() != n || grid.rows() == 0) throw std::invalid_argument("transmit_grid: grid shape mismatch");
  const std::size_t cp = s.layout.cp_length();
  const std::size_t sym_len = n + cp;

  const auto distances = place_users(s.imap.users, s.profile, rng);
  const UserChannel desired = draw_user_channel(s.profile, distances[0], n, rng);

  CVec tx;
  tx.reserve((grid.rows() + 1) * sym_len);
  detail::append_time(tx, detail::random_symbols(s.constellation, n, rng), cp);
  for (std::size_t r = 0; r < grid.rows(); ++r) detail::append_time(tx, grid.row(r), cp);
  CVec y = conv(tx, desired.effective_taps());

  for (std::size_t u : s.interferers()) {
    const UserChannel ch = draw_user_channel(s.profile, distances[u], n, rng);
    const auto alloc = s.imap.allocation(u);
    CVec itx;
    itx.reserve(tx.size());
    CVec freq(n);
    for (std::size_t r = 0; r <= grid.rows(); ++r) {
      const CVec sym = detail::random_symbols(s.constellation, alloc.size(), rng);
      for (std::size_t i = 0; i < alloc.size(); ++i) freq[alloc[i]] = sym[i];
      detail::append_time(itx, freq, cp);
    }
    const CVec yi = conv(itx, ch.effective_taps());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += yi[i];
  }

  const double p = desired.power_gain;
  const NoiseSpec noise = NoiseSpec::from_snr_db(snr_db, p);
  const double agc = 1.0 / std::sqrt(p);
  for (auto& v : y) v = (v + rng.complex_normal(noise.variance)) * agc;

  FrameLayout shape = s.layout;
  shape.data_symbols = grid.rows() - 1;
  Reception out;
  out.rx = strip_cp_and_dft(std::span<const cplx>(y).subspan(sym_len), shape);
  out.h = desired.small_scale_response();
  out.noise_variance = noise.variance / p;
  return out;
}

/// One pilot-plus-data frame and what the receiver saw.
struct FrameTrial {
  OfdmFrame frame;
  Reception reception;

  /// Payload bits of data symbol `d` (0-based), subcarrier order.
  [[nodiscard]] std::span<const std::uint8_t> data_bits(std::size_t d, std::size_t bits_per_symbol) const {
    const std::size_t per = frame.layout.subcarriers * bits_per_symbol;
    return std::span<const std::uint8_t>(frame.bits).subspan(d * per, per);
  }
};

inline FrameTrial simulate_frame(const LinkSetup& s, double snr_db, RngStream& rng) {
  Bits bits(s.layout.data_symbols * s.subcarriers() * s.bits_per_symbol());
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
  FrameTrial t;
  t.frame = build_frame(bits, s.pattern, s.constellation, s.layout);
  t.reception = transmit_grid(s, t.frame.grid, snr_db, rng);
  return t;
}

/// ELM coherence block: `pilots` known symbol rows followed by `data` rows,
/// all drawn from the configured constellation.
struct ElmTrial {
  CMat tx_pilots;
  CMat rx_pilots;
  CMat rx_data;
  Bits data_bits;  ///< symbol-major, subcarrier order
};

inline ElmTrial simulate_elm_block(const LinkSetup& s, std::size_t pilots, std::size_t data, double snr_db,
                                   RngStream& rng) {
  if (pilots == 0 || data == 0) throw std::invalid_argument("simulate_elm_block: empty pilot or data section");
  const std::size_t n = s.subcarriers();
  const std::size_t k = s.bits_per_symbol();
  ElmTrial t;
  t.data_bits.resize(data * n * k);
  for (auto& b : t.data_bits) b = static_cast<std::uint8_t>(rng.bit());
  const CVec data_syms = map_bits(t.data_bits, s.constellation);
  CMat grid(pilots + data, n);
  for (std::size_t r = 0; r < pilots; ++r) {
    const CVec p = detail::random_symbols(s.constellation, n, rng);
    std::copy(p.begin(), p.end(), grid.row(r).begin());
  }
  std::copy(data_syms.begin(), data_syms.end(), grid.data() + pilots * n);
  const Reception rec = transmit_grid(s, grid, snr_db, rng);
  t.tx_pilots = CMat(pilots, n);
  t.rx_pilots = CMat(pilots, n);
  t.rx_data = CMat(data, n);
  for (std::size_t r = 0; r < pilots; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      t.tx_pilots(r, c) = grid(r, c);
      t.rx_pilots(r, c) = rec.rx(r, c);
    }
  for (std::size_t r = 0; r < data; ++r)
    for (std::size_t c = 0; c < n; ++c) t.rx_data(r, c) = rec.rx(pilots + r, c);
  return t;
}

}  // namespace ofdmml::harness
