#pragma once

#include <cmath>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/channel/channel.hpp"
#include "ofdmml/modem/pilots.hpp"
#include "ofdmml/numerics/linalg.hpp"

namespace ofdmml {

enum class EstimateMethod { ls, mmse };

inline const char* to_string(EstimateMethod m) { return m == EstimateMethod::ls ? "ls" : "mmse"; }

/// Channel estimate over every subcarrier plus the pilot-position values it
/// was interpolated from.
struct ChannelEstimate {
  CVec response;
  CVec at_pilots;
  std::vector<std::size_t> pilot_indices;
  EstimateMethod method = EstimateMethod::ls;
};

/// Linear interpolation in frequency (real and imaginary parts separately);
/// subcarriers outside the first/last pilot hold the nearest pilot value.
inline CVec interpolate_linear(std::span<const cplx> values, std::span<const std::size_t> indices,
                               std::size_t subcarriers) {
  if (values.size() != indices.size() || values.empty()) {
    throw std::invalid_argument("interpolate_linear: need matching, nonempty pilot values and indices");
  }
  CVec out(subcarriers);
  for (std::size_t k = 0; k <= indices.front() && k < subcarriers; ++k) out[k] = values.front();
  for (std::size_t i = 0; i + 1 < indices.size(); ++i) {
    const std::size_t k0 = indices[i];
    const std::size_t k1 = indices[i + 1];
    const double span = static_cast<double>(k1 - k0);
    for (std::size_t k = k0; k <= k1; ++k) {
      const double t = static_cast<double>(k - k0) / span;
      out[k] = values[i] * (1.0 - t) + values[i + 1] * t;
    }
    count(Op::real_mul, 4 * (k1 - k0));
    count(Op::real_add, 2 * (k1 - k0));
  }
  for (std::size_t k = indices.back(); k < subcarriers; ++k) out[k] = values.back();
  return out;
}

/// H_ls = Y_p / X_p on the pilot subcarriers, then interpolated.
inline ChannelEstimate ls_estimate(std::span<const cplx> y_pilots, std::span<const cplx> x_pilots,
                                   std::span<const std::size_t> pilot_indices, std::size_t subcarriers) {
  if (y_pilots.size() != x_pilots.size() || y_pilots.size() != pilot_indices.size()) {
    throw std::invalid_argument("ls_estimate: pilot vectors differ in length");
  }
  ChannelEstimate e;
  e.method = EstimateMethod::ls;
  e.pilot_indices.assign(pilot_indices.begin(), pilot_indices.end());
  e.at_pilots.resize(y_pilots.size());
  for (std::size_t i = 0; i < y_pilots.size(); ++i) {
    if (x_pilots[i] == cplx{}) throw std::invalid_argument("ls_estimate: zero pilot value at position " + std::to_string(i));
    e.at_pilots[i] = y_pilots[i] / x_pilots[i];
  }
  count(Op::complex_div, y_pilots.size());
  if (pilot_indices.size() == subcarriers) {
    e.response = e.at_pilots;
  } else {
    e.response = interpolate_linear(e.at_pilots, pilot_indices, subcarriers);
  }
  return e;
}

/// Convenience overload reading the pilot symbol of a received grid row.
inline ChannelEstimate ls_estimate(std::span<const cplx> received_pilot_symbol, const PilotPattern& pattern) {
  CVec yp;
  for (auto k : pattern.pilot_indices()) yp.push_back(received_pilot_symbol[k]);
  const CVec xp = pattern.pilot_values();
  return ls_estimate(yp, xp, pattern.pilot_indices(), pattern.subcarriers());
}

/// Channel correlation on the pilot subcarriers. R_{H, H_ls} is taken equal to
/// R_HH since the noise is independent of the channel.
struct CorrelationModel {
  CMat r_hh;

  /// R(k, l) = sum_t p_t e^{-j 2 pi (k - l) t / N} from a power-delay profile.
  static CorrelationModel from_profile(const ChannelProfile& profile, std::span<const std::size_t> pilot_indices,
                                       std::size_t subcarriers) {
    const std::size_t n = pilot_indices.size();
    CorrelationModel m{CMat(n, n)};
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        const double dk = static_cast<double>(pilot_indices[a]) - static_cast<double>(pilot_indices[b]);
        cplx acc{};
        for (std::size_t t = 0; t < profile.taps(); ++t) {
          acc += profile.pdp[t] *
                 std::polar(1.0, -2.0 * std::numbers::pi * dk * static_cast<double>(t) / static_cast<double>(subcarriers));
        }
        m.r_hh(a, b) = acc;
      }
    }
    return m;
  }

  /// Sample covariance of `realizations` small-scale responses drawn from the profile.
  static CorrelationModel empirical(const ChannelProfile& profile, std::span<const std::size_t> pilot_indices,
                                    std::size_t subcarriers, std::size_t realizations, RngStream& rng) {
    if (realizations == 0) throw std::invalid_argument("CorrelationModel::empirical: zero realizations");
    const std::size_t n = pilot_indices.size();
    CorrelationModel m{CMat(n, n)};
    CVec taps(profile.taps());
    for (std::size_t r = 0; r < realizations; ++r) {
      for (std::size_t t = 0; t < profile.taps(); ++t) taps[t] = rng.complex_normal(profile.pdp[t]);
      const CVec h = frequency_response(taps, subcarriers);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) m.r_hh(a, b) += h[pilot_indices[a]] * std::conj(h[pilot_indices[b]]);
    }
    const double inv = 1.0 / static_cast<double>(realizations);
    for (std::size_t i = 0; i < m.r_hh.size(); ++i) m.r_hh.data()[i] *= inv;
    return m;
  }
};

/// Wiener weight matrix W = R (R + I/snr)^{-1}, formed by a Cholesky solve.
inline CMat mmse_weights(const CorrelationModel& corr, double snr_linear) {
  if (!(snr_linear > 0.0)) throw std::invalid_argument("mmse_weights: SNR must be positive");
  const std::size_t n = corr.r_hh.rows();
  CMat reg = corr.r_hh;
  for (std::size_t i = 0; i < n; ++i) reg(i, i) += 1.0 / snr_linear;
  // W = R reg^{-1}  <=>  reg^H W^H = R^H, and both are Hermitian.
  return adjoint(cholesky_solve(reg, corr.r_hh));
}

/// H_mmse = W H_ls on the pilot subcarriers, then interpolated like the LS
/// estimate. The weights are rebuilt on every call; `snr_linear` is the
/// pre-processing SNR.
inline ChannelEstimate mmse_estimate(const ChannelEstimate& ls, const CorrelationModel& corr, double snr_linear,
                                     std::size_t subcarriers) {
  if (!(snr_linear > 0.0)) throw std::invalid_argument("mmse_estimate: SNR must be positive");
  const std::size_t n = ls.at_pilots.size();
  if (corr.r_hh.rows() != n || corr.r_hh.cols() != n) {
    throw std::invalid_argument("mmse_estimate: correlation is " + std::to_string(corr.r_hh.rows()) + "x" +
                                std::to_string(corr.r_hh.cols()) + ", pilot count " + std::to_string(n));
  }
  const CMat w = mmse_weights(corr, snr_linear);
  ChannelEstimate e;
  e.method = EstimateMethod::mmse;
  e.pilot_indices = ls.pilot_indices;
  e.at_pilots = w * std::span<const cplx>(ls.at_pilots.data(), n);
  if (n == subcarriers) {
    e.response = e.at_pilots;
  } else {
    e.response = interpolate_linear(e.at_pilots, e.pilot_indices, subcarriers);
  }
  return e;
}

inline constexpr double kEqualizerFloor = 1e-12;

struct Equalized {
  CVec symbols;
  std::vector<std::size_t> flagged;  ///< subcarriers whose estimate fell below the floor
};

/// One-tap equalisation X = Y / H at the given subcarriers. Subcarriers with
/// |H| below the floor output 0, which demaps to the point nearest the origin.
inline Equalized equalize(std::span<const cplx> y, std::span<const cplx> h) {
  if (y.size() != h.size()) throw std::invalid_argument("equalize: length mismatch");
  Equalized out;
  out.symbols.resize(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (std::abs(h[k]) < kEqualizerFloor) {
      out.symbols[k] = 0.0;
      out.flagged.push_back(k);
    } else {
      out.symbols[k] = y[k] / h[k];
    }
  }
  count(Op::complex_div, y.size());
  return out;
}

/// sum_i ||H(i) - H_est(i)||^2 / (S * ||H_v||^2), H_v the stacked true samples.
inline double nmse(std::span<const CVec> truth, std::span<const CVec> estimate) {
  if (truth.empty()) throw std::invalid_argument("nmse: no samples");
  if (truth.size() != estimate.size()) throw std::invalid_argument("nmse: sample counts differ");
  double err = 0.0;
  double energy = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != estimate[i].size()) throw std::invalid_argument("nmse: sample lengths differ");
    for (std::size_t k = 0; k < truth[i].size(); ++k) {
      err += std::norm(truth[i][k] - estimate[i][k]);
      energy += std::norm(truth[i][k]);
    }
  }
  if (!(energy > 0.0)) throw std::invalid_argument("nmse: true channel has zero energy");
  return err / (static_cast<double>(truth.size()) * energy);
}

inline void write_estimate_csv(std::ostream& os, std::size_t trial, const CVec& truth, const ChannelEstimate& est,
                               bool header) {
  if (header) os << "trial,method,subcarrier,true_re,true_im,est_re,est_im\n";
  for (std::size_t k = 0; k < truth.size(); ++k) {
    os << trial << ',' << to_string(est.method) << ',' << k << ',' << truth[k].real() << ',' << truth[k].imag() << ','
       << est.response[k].real() << ',' << est.response[k].imag() << '\n';
  }
}

}  // namespace ofdmml
