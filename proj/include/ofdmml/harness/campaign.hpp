#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ofdmml/elm/elm.hpp"
#include "ofdmml/estimators/estimators.hpp"
#include "ofdmml/flops.hpp"
#include "ofdmml/harness/config.hpp"
#include "ofdmml/harness/dnn_detector.hpp"
#include "ofdmml/harness/link.hpp"
#include "ofdmml/harness/metrics.hpp"

namespace ofdmml::harness {

struct CampaignOptions {
  /// Pre-trained DNN; when null and "dnn" is selected, one is loaded or trained.
  const DnnDetector* dnn = nullptr;
  /// Rows are appended here after every SNR point when set.
  MetricsWriter* writer = nullptr;
  std::function<void(const std::string&)> log;
};

namespace detail {

struct Tally {
  BerCounter ber;
  FlopCounter flops;
  double nmse_err = 0.0;
  double nmse_energy = 0.0;
  double nmse_ratio_sum = 0.0;
  std::size_t blocks = 0;
  bool has_nmse = false;

  void add_estimate(std::span<const cplx> truth, std::span<const cplx> est) {
    double e = 0.0;
    double p = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      e += std::norm(truth[k] - est[k]);
      p += std::norm(truth[k]);
    }
    nmse_err += e;
    nmse_energy += p;
    nmse_ratio_sum += e / p;
    has_nmse = true;
  }

  [[nodiscard]] std::optional<double> nmse(NmseMode mode) const {
    if (!has_nmse) return std::nullopt;
    return mode == NmseMode::pooled ? nmse_err / nmse_energy : nmse_ratio_sum / static_cast<double>(blocks);
  }
};

inline void detect_with_estimate(const FrameTrial& t, const LinkSetup& s, std::span<const cplx> h, Tally& tally) {
  const CMat& rx = t.reception.rx;
  for (std::size_t d = 0; d < s.layout.data_symbols; ++d) {
    const Equalized eq = equalize(rx.row(d + 1), h);
    tally.ber.add(t.data_bits(d, s.bits_per_symbol()), demap_symbols(eq.symbols, s.constellation));
  }
}

}  // namespace detail

/// Runs every selected detector over config.trials independent coherence
/// blocks per SNR point (config.elm_trials for the ELM). Trial t at SNR index
/// i draws from stream (i, t) of the seed, so results depend only on the
/// configuration. Perfect CSI, LS, MMSE and DNN see the same blocks.
inline std::vector<MetricRecord> run_campaign(const ExperimentConfig& c, const CampaignOptions& opt = {}) {
  c.validate();
  const LinkSetup s = LinkSetup::from_config(c);
  const std::string id = run_id(c);
  const std::size_t n = s.subcarriers();

  std::optional<DnnDetector> own_dnn;
  const DnnDetector* dnn = opt.dnn;
  if (c.wants("dnn") && dnn == nullptr) {
    if (opt.log) opt.log(c.dnn.checkpoint.empty() ? "training DNN detector" : "loading " + c.dnn.checkpoint);
    own_dnn = obtain_dnn(c);
    dnn = &*own_dnn;
  }
  const CorrelationModel corr = CorrelationModel::from_profile(s.profile, s.pattern.pilot_indices(), n);
  ElmBank bank(n, c.elm.elm_config(), c.seed);

  std::vector<MetricRecord> all;
  for (std::size_t i = 0; i < c.snr_db.size(); ++i) {
    const double snr_db = c.snr_db[i];
    const double snr = std::pow(10.0, snr_db / 10.0);
    std::map<std::string, detail::Tally> tallies;
    for (const auto& d : c.detectors) tallies[d];

    const bool frame_detectors = c.wants("perfect") || c.wants("ls") || c.wants("mmse") || c.wants("dnn");
    for (std::size_t t = 0; frame_detectors && t < c.trials; ++t) {
      RngStream rng(c.seed, stream_id(0xb10c, i, t));
      const FrameTrial trial = simulate_frame(s, snr_db, rng);
      const Reception& rec = trial.reception;
      if (c.wants("perfect")) {
        auto& tl = tallies["perfect"];
        FlopScope scope(tl.flops);
        detail::detect_with_estimate(trial, s, rec.h, tl);
        ++tl.blocks;
      }
      if (c.wants("ls")) {
        auto& tl = tallies["ls"];
        FlopScope scope(tl.flops);
        const ChannelEstimate est = ls_estimate(rec.rx.row(0), s.pattern);
        detail::detect_with_estimate(trial, s, est.response, tl);
        ++tl.blocks;
        tl.add_estimate(rec.h, est.response);
      }
      if (c.wants("mmse")) {
        auto& tl = tallies["mmse"];
        FlopScope scope(tl.flops);
        const ChannelEstimate est = mmse_estimate(ls_estimate(rec.rx.row(0), s.pattern), corr, snr, n);
        detail::detect_with_estimate(trial, s, est.response, tl);
        ++tl.blocks;
        tl.add_estimate(rec.h, est.response);
      }
      if (c.wants("dnn")) {
        auto& tl = tallies["dnn"];
        FlopScope scope(tl.flops);
        for (std::size_t d = 0; d < s.layout.data_symbols; ++d) {
          tl.ber.add(trial.data_bits(d, s.bits_per_symbol()), dnn->detect(rec.rx, d + 1));
        }
        ++tl.blocks;
      }
    }

    for (std::size_t t = 0; c.wants("elm") && t < c.elm_trials; ++t) {
      RngStream rng(c.seed, stream_id(0xe1b0, i, t));
      const ElmTrial block = simulate_elm_block(s, c.elm.pilots, c.elm.data, snr_db, rng);
      auto& tl = tallies["elm"];
      FlopScope scope(tl.flops);
      bank.train(block.rx_pilots, block.tx_pilots);
      tl.ber.add(block.data_bits, bank.detect_bits(block.rx_data, s.constellation));
      ++tl.blocks;
    }

    std::vector<MetricRecord> rows;
    for (const auto& d : c.detectors) {
      const auto& tl = tallies[d];
      MetricRecord r;
      r.run_id = id;
      r.scenario = c.scenario;
      r.detector = d;
      r.modulation = c.modulation;
      r.pilots = d == "elm" ? c.elm.pilots : c.pilots;
      r.cp_fraction = c.cp_fraction;
      r.users = c.users;
      r.snr_db = snr_db;
      r.trials = tl.blocks;
      r.bits = tl.ber.bits;
      r.bit_errors = tl.ber.errors;
      r.nmse = tl.nmse(c.nmse);
      r.flops_per_frame = static_cast<double>(tl.flops.real_flops()) / static_cast<double>(tl.blocks);
      rows.push_back(r);
      if (opt.log) opt.log(format_record(r));
    }
    if (opt.writer) opt.writer->append(rows);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

}  // namespace ofdmml::harness
