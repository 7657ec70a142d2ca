#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/modem/qam.hpp"
#include "ofdmml/numerics/rng.hpp"

namespace ofdmml {

enum class PilotArrangement { block, comb };

/// Pilot subcarriers of the pilot OFDM symbol and the known values they carry.
/// Block type fills every subcarrier; comb type spaces `count` pilots evenly,
/// centred within each spacing interval. `data_indices` is the complement.
class PilotPattern {
 public:
  PilotPattern(std::size_t subcarriers, std::size_t pilot_count, std::uint64_t seed = 0x5eed)
      : subcarriers_(subcarriers) {
    if (subcarriers == 0) throw std::invalid_argument("PilotPattern: zero subcarriers");
    if (pilot_count == 0 || pilot_count > subcarriers) {
      throw std::invalid_argument("PilotPattern: pilot count " + std::to_string(pilot_count) +
                                  " outside [1, " + std::to_string(subcarriers) + "]");
    }
    arrangement_ = pilot_count == subcarriers ? PilotArrangement::block : PilotArrangement::comb;
    const double spacing = static_cast<double>(subcarriers) / static_cast<double>(pilot_count);
    for (std::size_t i = 0; i < pilot_count; ++i) {
      const auto k = static_cast<std::size_t>(std::floor(spacing * static_cast<double>(i) + spacing / 2.0));
      pilot_indices_.push_back(std::min(k, subcarriers - 1));
    }
    if (arrangement_ == PilotArrangement::block) {
      for (std::size_t k = 0; k < subcarriers; ++k) pilot_indices_[k] = k;
    }
    std::vector<bool> is_pilot(subcarriers, false);
    for (auto k : pilot_indices_) is_pilot[k] = true;
    for (std::size_t k = 0; k < subcarriers; ++k)
      if (!is_pilot[k]) data_indices_.push_back(k);

    // Known QPSK pilot sequence, fixed by the seed.
    const QamConstellation qpsk(4);
    RngStream rng(seed, stream_id(0x9170, subcarriers));
    values_.resize(subcarriers);
    for (auto& v : values_) v = qpsk.point(rng.below(4));
  }

  [[nodiscard]] std::size_t subcarriers() const noexcept { return subcarriers_; }
  [[nodiscard]] PilotArrangement arrangement() const noexcept { return arrangement_; }
  [[nodiscard]] const std::vector<std::size_t>& pilot_indices() const noexcept { return pilot_indices_; }
  [[nodiscard]] const std::vector<std::size_t>& data_indices() const noexcept { return data_indices_; }
  [[nodiscard]] std::size_t pilot_count() const noexcept { return pilot_indices_.size(); }

  /// Known pilot values at the pilot indices, in index order.
  [[nodiscard]] CVec pilot_values() const {
    CVec out;
    out.reserve(pilot_indices_.size());
    for (auto k : pilot_indices_) out.push_back(values_[k]);
    return out;
  }

  void write_csv(std::ostream& os) const {
    os << "subcarrier,role,re,im\n";
    std::vector<bool> is_pilot(subcarriers_, false);
    for (auto k : pilot_indices_) is_pilot[k] = true;
    for (std::size_t k = 0; k < subcarriers_; ++k) {
      if (is_pilot[k]) {
        os << k << ",pilot," << values_[k].real() << ',' << values_[k].imag() << '\n';
      } else {
        os << k << ",non_pilot,0,0\n";
      }
    }
  }

 private:
  std::size_t subcarriers_;
  PilotArrangement arrangement_;
  std::vector<std::size_t> pilot_indices_;
  std::vector<std::size_t> data_indices_;
  CVec values_;
};

inline void write_constellation_csv(std::ostream& os, const QamConstellation& c) {
  os << "index,label,re,im\n";
  const auto pts = c.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    os << i << ',';
    for (int b = c.bits_per_symbol() - 1; b >= 0; --b) os << ((i >> b) & 1u);
    os << ',' << pts[i].real() << ',' << pts[i].imag() << '\n';
  }
}

}  // namespace ofdmml
