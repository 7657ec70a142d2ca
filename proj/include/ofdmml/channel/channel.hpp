#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/numerics/conv.hpp"
#include "ofdmml/numerics/dft.hpp"
#include "ofdmml/numerics/rng.hpp"

namespace ofdmml {

/// Multipath power-delay profile plus the large-scale parameters of the cell.
struct ChannelProfile {
  std::vector<double> pdp{1.0};
  double path_loss_exponent = -3.0;
  double cell_radius_m = 500.0;
  double min_distance_m = 10.0;
  double coherence_ms = 5.0;

  /// `taps` taps with powers decaying geometrically so the last tap sits
  /// `decay_db` below the first; weights normalised to unit sum.
  static ChannelProfile exponential(std::size_t taps = 8, double decay_db = 20.0) {
    if (taps == 0) throw std::invalid_argument("ChannelProfile: zero taps");
    ChannelProfile p;
    p.pdp.assign(taps, 1.0);
    if (taps > 1) {
      const double step_db = decay_db / static_cast<double>(taps - 1);
      for (std::size_t t = 0; t < taps; ++t) p.pdp[t] = std::pow(10.0, -step_db * static_cast<double>(t) / 10.0);
    }
    p.normalise();
    return p;
  }

  static ChannelProfile from_weights(std::vector<double> w) {
    ChannelProfile p;
    p.pdp = std::move(w);
    p.normalise();
    return p;
  }

  [[nodiscard]] std::size_t taps() const noexcept { return pdp.size(); }

  /// Throws when the profile is malformed or longer than the cyclic prefix
  /// (cp_length == 0 disables the length check).
  void validate(std::size_t cp_length = 0) const {
    if (pdp.empty()) throw std::invalid_argument("ChannelProfile: empty power-delay profile");
    double sum = 0.0;
    for (double w : pdp) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("ChannelProfile: negative or non-finite weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("ChannelProfile: weights do not sum to 1");
    if (cp_length > 0 && taps() > cp_length) {
      throw std::invalid_argument("ChannelProfile: " + std::to_string(taps()) + " taps exceed cyclic prefix of " +
                                  std::to_string(cp_length));
    }
    if (!(cell_radius_m > 0.0) || !(min_distance_m > 0.0) || min_distance_m >= cell_radius_m) {
      throw std::invalid_argument("ChannelProfile: need 0 < min distance < cell radius");
    }
  }

 private:
  void normalise() {
    const double s = std::accumulate(pdp.begin(), pdp.end(), 0.0);
    if (!(s > 0.0)) throw std::invalid_argument("ChannelProfile: weights sum to zero");
    for (auto& w : pdp) w /= s;
  }
};

/// Large-scale power gain d^eta (eta < 0: power decays with distance).
inline double path_gain(double distance_m, double eta) { return std::pow(distance_m, eta); }

/// Mean receive power per subcarrier for a user at `distance_m` under equal
/// power allocation of `total_power` over `data_subcarriers`.
inline double mean_receive_power(double distance_m, double eta, double total_power, std::size_t data_subcarriers) {
  return path_gain(distance_m, eta) * total_power / static_cast<double>(data_subcarriers);
}

/// Frequency response sum_t h_t e^{-j 2 pi k t / N}, i.e. sqrt(N) times the
/// unitary DFT of the zero-padded taps.
inline CVec frequency_response(std::span<const cplx> taps, std::size_t subcarriers) {
  if (taps.size() > subcarriers) throw std::invalid_argument("frequency_response: more taps than subcarriers");
  CVec padded(subcarriers);
  std::copy(taps.begin(), taps.end(), padded.begin());
  CVec h = dft(padded);
  const double s = std::sqrt(static_cast<double>(subcarriers));
  for (auto& v : h) v *= s;
  return h;
}

/// One user's channel for one coherence block. `taps` are the small-scale
/// taps (unit average energy); `response` includes the path-loss amplitude.
struct UserChannel {
  CVec taps;
  CVec response;
  double distance_m = 0.0;
  double power_gain = 1.0;

  [[nodiscard]] double amplitude() const { return std::sqrt(power_gain); }

  [[nodiscard]] CVec effective_taps() const {
    CVec out = taps;
    for (auto& v : out) v *= amplitude();
    return out;
  }

  /// Small-scale frequency response (path loss removed).
  [[nodiscard]] CVec small_scale_response() const {
    CVec out = response;
    const double a = amplitude();
    for (auto& v : out) v /= a;
    return out;
  }
};

struct ChannelRealization {
  std::vector<UserChannel> users;
  std::size_t subcarriers = 0;
};

inline UserChannel draw_user_channel(const ChannelProfile& profile, double distance_m, std::size_t subcarriers,
                                     RngStream& rng) {
  UserChannel u;
  u.taps.resize(profile.taps());
  for (std::size_t t = 0; t < profile.taps(); ++t) u.taps[t] = rng.complex_normal(profile.pdp[t]);
  u.distance_m = distance_m;
  u.power_gain = path_gain(distance_m, profile.path_loss_exponent);
  u.response = frequency_response(u.effective_taps(), subcarriers);
  return u;
}

/// Independent Rayleigh taps (CN(0, pdp_t)) per user for one coherence block.
inline ChannelRealization draw_realization(const ChannelProfile& profile, std::span<const double> distances,
                                           std::size_t subcarriers, RngStream& rng) {
  if (distances.empty()) throw std::invalid_argument("draw_realization: no user distances");
  for (double d : distances) {
    if (!(d > 0.0) || d > profile.cell_radius_m) {
      throw std::invalid_argument("draw_realization: distance " + std::to_string(d) + " m outside (0, " +
                                  std::to_string(profile.cell_radius_m) + "]");
    }
  }
  ChannelRealization r;
  r.subcarriers = subcarriers;
  for (double d : distances) r.users.push_back(draw_user_channel(profile, d, subcarriers, rng));
  return r;
}

/// Per-sample (time domain) and per-subcarrier (frequency domain) noise power.
struct NoiseSpec {
  double variance = 1.0;

  /// sigma^2 = P / snr for a receive power P per subcarrier.
  static NoiseSpec from_snr_db(double snr_db, double receive_power) {
    if (!(receive_power > 0.0)) throw std::invalid_argument("NoiseSpec: receive power must be positive");
    return NoiseSpec{receive_power / std::pow(10.0, snr_db / 10.0)};
  }
};

/// y = x (*) h_eff + z, with linear convolution (length |x| + taps - 1) and
/// z ~ CN(0, sigma^2) per sample. A zero variance skips noise generation.
inline CVec apply(std::span<const cplx> x, const UserChannel& ch, const NoiseSpec& noise, RngStream& rng) {
  if (x.empty()) throw std::invalid_argument("apply: empty signal");
  CVec y = conv(x, ch.effective_taps());
  if (noise.variance > 0.0) {
    for (auto& v : y) v += rng.complex_normal(noise.variance);
  }
  return y;
}

/// Frequency-domain fast path: Y = X (.) H + Z on each symbol row. Matches the
/// time-domain path when the cyclic prefix covers the channel memory.
inline CMat apply_frequency(const CMat& grid, const UserChannel& ch, const NoiseSpec& noise, RngStream& rng) {
  if (grid.cols() != ch.response.size()) throw std::invalid_argument("apply_frequency: subcarrier count mismatch");
  CMat out(grid.rows(), grid.cols());
  for (std::size_t s = 0; s < grid.rows(); ++s) {
    for (std::size_t k = 0; k < grid.cols(); ++k) {
      out(s, k) = grid(s, k) * ch.response[k];
      if (noise.variance > 0.0) out(s, k) += rng.complex_normal(noise.variance);
    }
  }
  return out;
}

/// Distances of `users` points drawn uniformly over the annulus
/// [min_distance, cell_radius].
inline std::vector<double> place_users(std::size_t users, const ChannelProfile& profile, RngStream& rng) {
  if (users == 0) throw std::invalid_argument("place_users: need at least one user");
  const double r0 = profile.min_distance_m * profile.min_distance_m;
  const double r1 = profile.cell_radius_m * profile.cell_radius_m;
  std::vector<double> d(users);
  for (auto& v : d) v = std::sqrt(r0 + (r1 - r0) * rng.uniform());
  return d;
}

}  // namespace ofdmml
