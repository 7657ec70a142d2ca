#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/elm/elm.hpp"
#include "ofdmml/estimators/estimators.hpp"
#include "ofdmml/harness/config.hpp"
#include "ofdmml/harness/dnn_detector.hpp"
#include "ofdmml/harness/link.hpp"

namespace ofdmml::harness {

struct TimingStats {
  double median_ms = 0.0;
  double iqr_ms = 0.0;
  std::vector<double> samples_ms;
};

/// Linear-interpolation quantile of sorted data, q in [0, 1].
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: no samples");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline TimingStats summarize_timings(std::vector<double> samples_ms) {
  if (samples_ms.empty()) throw std::invalid_argument("summarize_timings: no samples");
  TimingStats t;
  t.samples_ms = samples_ms;
  std::sort(samples_ms.begin(), samples_ms.end());
  t.median_ms = quantile_sorted(samples_ms, 0.5);
  t.iqr_ms = quantile_sorted(samples_ms, 0.75) - quantile_sorted(samples_ms, 0.25);
  return t;
}

/// Wall-clock statistics of `fn` over `repetitions` calls after `warmup`
/// untimed calls.
template <class F>
TimingStats time_calls(F&& fn, std::size_t repetitions, std::size_t warmup = 5) {
  if (repetitions == 0) throw std::invalid_argument("time_calls: zero repetitions");
  for (std::size_t i = 0; i < warmup; ++i) fn();
  std::vector<double> ms;
  ms.reserve(repetitions);
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return summarize_timings(std::move(ms));
}

inline const std::vector<std::string> kTimedDetectors = {"perfect", "ls", "mmse", "dnn", "elm", "elm_train"};

/// Per-frame detection time. DNN, LS, MMSE and perfect CSI process one
/// pilot-plus-data frame; "elm" detects one data symbol with a bank trained
/// on elm.pilots symbols and "elm_train" times that training alone.
inline TimingStats time_inference(const std::string& detector, const ExperimentConfig& c, std::size_t repetitions,
                                  const DnnDetector* dnn = nullptr, std::size_t warmup = 5) {
  const LinkSetup s = LinkSetup::from_config(c);
  const std::size_t n = s.subcarriers();
  const double snr_db = c.snr_db.back();
  const double snr = std::pow(10.0, snr_db / 10.0);
  volatile std::size_t sink = 0;

  if (detector == "elm" || detector == "elm_train") {
    RngStream rng(c.seed, stream_id(0x71e, 1));
    const ElmTrial block = simulate_elm_block(s, c.elm.pilots, 1, snr_db, rng);
    ElmBank bank(n, c.elm.elm_config(), c.seed);
    bank.train(block.rx_pilots, block.tx_pilots);
    if (detector == "elm_train") {
      return time_calls([&] { bank.train(block.rx_pilots, block.tx_pilots); }, repetitions, warmup);
    }
    return time_calls([&] { sink = sink + bank.detect_bits(block.rx_data, s.constellation).size(); }, repetitions,
                      warmup);
  }

  RngStream rng(c.seed, stream_id(0x71e, 0));
  const FrameTrial t = simulate_frame(s, snr_db, rng);
  const CMat& rx = t.reception.rx;
  if (detector == "perfect") {
    return time_calls([&] { sink = sink + demap_symbols(equalize(rx.row(1), t.reception.h).symbols, s.constellation).size(); },
                      repetitions, warmup);
  }
  if (detector == "ls") {
    return time_calls(
        [&] {
          const ChannelEstimate e = ls_estimate(rx.row(0), s.pattern);
          sink = sink + demap_symbols(equalize(rx.row(1), e.response).symbols, s.constellation).size();
        },
        repetitions, warmup);
  }
  if (detector == "mmse") {
    const CorrelationModel corr = CorrelationModel::from_profile(s.profile, s.pattern.pilot_indices(), n);
    return time_calls(
        [&] {
          const ChannelEstimate e = mmse_estimate(ls_estimate(rx.row(0), s.pattern), corr, snr, n);
          sink = sink + demap_symbols(equalize(rx.row(1), e.response).symbols, s.constellation).size();
        },
        repetitions, warmup);
  }
  if (detector == "dnn") {
    std::optional<DnnDetector> own;
    if (dnn == nullptr) {
      const std::size_t group = c.dnn_group_subcarriers();
      std::vector<nn::Mlp<float>> models;
      for (std::size_t g = 0; g < n / group; ++g) {
        models.push_back(nn::Mlp<float>::relu_sigmoid(4 * n, c.dnn.hidden, group * s.bits_per_symbol()));
        RngStream init(c.seed, stream_id(0x1417, g));
        models.back().initialize(init);
      }
      own.emplace(std::move(models), n, s.bits_per_symbol());
      dnn = &*own;
    }
    return time_calls([&] { sink = sink + dnn->detect(rx, 1).size(); }, repetitions, warmup);
  }
  throw std::invalid_argument("time_inference: unknown detector '" + detector + "'");
}

}  // namespace ofdmml::harness
