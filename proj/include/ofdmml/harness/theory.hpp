#pragma once

#include <cmath>
#include <stdexcept>

#include "ofdmml/modem/qam.hpp"

namespace ofdmml::harness {

/// Average BER of coherent M-QAM over flat Rayleigh fading at mean SNR
/// `snr_linear`: (alpha/2) [1 - sqrt(0.5 beta snr / (1 + 0.5 beta snr))].
inline double theoretical_ber(double snr_linear, int order) {
  if (!(snr_linear > 0.0)) throw std::invalid_argument("theoretical_ber: SNR must be positive");
  const BerConstants k = ber_constants(order);
  const double g = 0.5 * k.beta * snr_linear;
  return 0.5 * k.alpha * (1.0 - std::sqrt(g / (1.0 + g)));
}

inline double theoretical_ber_db(double snr_db, int order) {
  return theoretical_ber(std::pow(10.0, snr_db / 10.0), order);
}

}  // namespace ofdmml::harness
