#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/elm/elm.hpp"
#include "ofdmml/estimators/estimators.hpp"
#include "ofdmml/flops.hpp"
#include "ofdmml/harness/config.hpp"
#include "ofdmml/harness/dnn_detector.hpp"
#include "ofdmml/harness/link.hpp"

namespace ofdmml::harness {

/// Frame shape for operation counting. Classical detectors process one pilot
/// symbol plus one data symbol; the ELM trains on `elm_pilots` pilot symbols
/// and detects one data symbol. Transforms (DFT/IDFT) are not counted.
struct FlopScenario {
  std::size_t subcarriers = 64;
  std::size_t pilots = 0;  ///< 0 selects block pilots (one per subcarrier)
  int modulation = 4;
  std::size_t elm_pilots = 100;
  std::size_t elm_hidden = 50;
  std::vector<std::size_t> dnn_hidden{500, 250, 120};
  std::size_t dnn_output_bits = 64;
  double snr_db = 15.0;
  std::uint64_t seed = 1;

  static FlopScenario from_config(const ExperimentConfig& c) {
    FlopScenario f;
    f.subcarriers = c.subcarriers;
    f.pilots = c.pilots;
    f.modulation = c.modulation;
    f.elm_pilots = c.elm.pilots;
    f.elm_hidden = c.elm.hidden;
    f.dnn_hidden = c.dnn.hidden;
    f.dnn_output_bits = c.dnn.output_bits;
    f.seed = c.seed;
    return f;
  }

  [[nodiscard]] ExperimentConfig config() const {
    ExperimentConfig c;
    c.subcarriers = subcarriers;
    c.pilots = pilots == 0 ? subcarriers : pilots;
    c.modulation = modulation;
    c.elm.pilots = elm_pilots;
    c.elm.hidden = elm_hidden;
    c.dnn.hidden = dnn_hidden;
    c.dnn.output_bits = dnn_output_bits;
    c.seed = seed;
    c.validate();
    return c;
  }
};

/// Operations spent by `detector` on one frame of `scenario`.
inline FlopCounter count_flops(const std::string& detector, const FlopScenario& scenario) {
  const ExperimentConfig c = scenario.config();
  const LinkSetup s = LinkSetup::from_config(c);
  const std::size_t n = s.subcarriers();
  const double snr = std::pow(10.0, scenario.snr_db / 10.0);
  FlopCounter fc;

  if (detector == "elm") {
    RngStream rng(c.seed, stream_id(0xf10b, 1));
    const ElmTrial block = simulate_elm_block(s, c.elm.pilots, 1, scenario.snr_db, rng);
    ElmBank bank(n, c.elm.elm_config(), c.seed);
    FlopScope scope(fc);
    bank.train(block.rx_pilots, block.tx_pilots);
    (void)bank.detect(block.rx_data);
    return fc;
  }

  RngStream rng(c.seed, stream_id(0xf10b, 0));
  const FrameTrial t = simulate_frame(s, scenario.snr_db, rng);
  const CMat& rx = t.reception.rx;
  if (detector == "perfect") {
    FlopScope scope(fc);
    (void)equalize(rx.row(1), t.reception.h);
  } else if (detector == "ls") {
    FlopScope scope(fc);
    const ChannelEstimate e = ls_estimate(rx.row(0), s.pattern);
    (void)equalize(rx.row(1), e.response);
  } else if (detector == "mmse") {
    const CorrelationModel corr = CorrelationModel::from_profile(s.profile, s.pattern.pilot_indices(), n);
    FlopScope scope(fc);
    const ChannelEstimate e = mmse_estimate(ls_estimate(rx.row(0), s.pattern), corr, snr, n);
    (void)equalize(rx.row(1), e.response);
  } else if (detector == "dnn") {
    const std::size_t group = c.dnn_group_subcarriers();
    std::vector<nn::Mlp<float>> models;
    for (std::size_t g = 0; g < n / group; ++g) {
      models.push_back(nn::Mlp<float>::relu_sigmoid(4 * n, c.dnn.hidden, group * s.bits_per_symbol()));
    }
    const DnnDetector dnn(std::move(models), n, s.bits_per_symbol());
    FlopScope scope(fc);
    (void)dnn.detect(rx, 1);
  } else {
    throw std::invalid_argument("count_flops: unknown detector '" + detector + "'");
  }
  return fc;
}

/// Ratio of real-flop counts between two scenarios.
inline double flop_ratio(const std::string& detector, const FlopScenario& small, const FlopScenario& large) {
  const auto a = count_flops(detector, small).real_flops();
  const auto b = count_flops(detector, large).real_flops();
  if (a == 0) throw std::runtime_error("flop_ratio: zero operations for '" + detector + "'");
  return static_cast<double>(b) / static_cast<double>(a);
}

/// One doubling experiment and the ratio its complexity order predicts.
struct ScalingCheck {
  std::string detector;
  std::string parameter;
  std::size_t from = 0;
  std::size_t to = 0;
  double expected = 0.0;
  double measured = 0.0;

  [[nodiscard]] bool within(double tolerance) const {
    return measured >= expected * (1.0 - tolerance) && measured <= expected * (1.0 + tolerance);
  }
};

/// LS over N_c 64 -> 128 (expects 2), MMSE over N_c 32 -> 64 (expects 8)
/// and ELM over L 50 -> 100 at I = 100 (expects 8), all with block pilots.
inline std::vector<ScalingCheck> doubling_checks() {
  std::vector<ScalingCheck> out;
  FlopScenario a;
  FlopScenario b;
  a.subcarriers = 64;
  b.subcarriers = 128;
  out.push_back({"ls", "subcarriers", 64, 128, 2.0, flop_ratio("ls", a, b)});
  a.subcarriers = 32;
  b.subcarriers = 64;
  out.push_back({"mmse", "subcarriers", 32, 64, 8.0, flop_ratio("mmse", a, b)});
  a = FlopScenario{};
  b = FlopScenario{};
  a.elm_hidden = 50;
  b.elm_hidden = 100;
  out.push_back({"elm", "hidden", 50, 100, 8.0, flop_ratio("elm", a, b)});
  return out;
}

}  // namespace ofdmml::harness
