#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ofdmml/harness/config.hpp"
#include "ofdmml/harness/link.hpp"
#include "ofdmml/neural/checkpoint.hpp"
#include "ofdmml/neural/trainer.hpp"

namespace ofdmml::harness {

inline constexpr const char* kDnnFormat = "ofdmml-dnn-detector";

/// Writes [Re Y_p, Im Y_p, Re Y_d, Im Y_d] for pilot row 0 and data row
/// `data_row` of `rx` into column `col` of `out`.
template <class T>
void write_features(const CMat& rx, std::size_t data_row, nn::Mat<T>& out, Eigen::Index col) {
  const std::size_t n = rx.cols();
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const auto nn_ = static_cast<Eigen::Index>(n);
    out(i, col) = static_cast<T>(rx(0, k).real());
    out(nn_ + i, col) = static_cast<T>(rx(0, k).imag());
    out(2 * nn_ + i, col) = static_cast<T>(rx(data_row, k).real());
    out(3 * nn_ + i, col) = static_cast<T>(rx(data_row, k).imag());
  }
}

/// Bit detector made of one MLP per contiguous group of subcarriers; model g
/// reads the whole received frame and outputs the bits of group g.
class DnnDetector {
 public:
  DnnDetector(std::vector<nn::Mlp<float>> models, std::size_t subcarriers, std::size_t bits_per_symbol)
      : models_(std::move(models)), subcarriers_(subcarriers), bits_per_symbol_(bits_per_symbol) {
    if (models_.empty()) throw std::invalid_argument("DnnDetector: no models");
    std::size_t total = 0;
    for (const auto& m : models_) {
      if (m.input_size() != 4 * subcarriers) {
        throw std::invalid_argument("DnnDetector: model input " + std::to_string(m.input_size()) + " != 4 x " +
                                    std::to_string(subcarriers));
      }
      total += m.output_size();
    }
    if (total != subcarriers * bits_per_symbol) {
      throw std::invalid_argument("DnnDetector: model outputs cover " + std::to_string(total) + " bits, frame has " +
                                  std::to_string(subcarriers * bits_per_symbol));
    }
  }

  [[nodiscard]] std::size_t groups() const noexcept { return models_.size(); }
  [[nodiscard]] const nn::Mlp<float>& model(std::size_t g) const { return models_.at(g); }
  [[nodiscard]] std::size_t subcarriers() const noexcept { return subcarriers_; }
  [[nodiscard]] std::size_t bits_per_symbol() const noexcept { return bits_per_symbol_; }

  /// Hard bits of data row `data_row`, subcarrier order.
  [[nodiscard]] Bits detect(const CMat& rx, std::size_t data_row) const {
    if (rx.cols() != subcarriers_ || data_row == 0 || data_row >= rx.rows()) {
      throw std::invalid_argument("DnnDetector::detect: bad received grid or data row");
    }
    nn::Mat<float> x(static_cast<Eigen::Index>(4 * subcarriers_), 1);
    write_features(rx, data_row, x, 0);
    Bits out;
    out.reserve(subcarriers_ * bits_per_symbol_);
    for (const auto& m : models_) {
      const nn::Mat<float> y = m.forward(x);
      const auto b = nn::threshold_bits<float>(y.col(0));
      out.insert(out.end(), b.begin(), b.end());
    }
    return out;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : models_) models.push_back(nn::to_json(m));
    return {{"format", kDnnFormat},
            {"version", 1},
            {"subcarriers", subcarriers_},
            {"bits_per_symbol", bits_per_symbol_},
            {"models", models}};
  }

  static DnnDetector from_json(const nlohmann::json& j) {
    if (j.value("format", "") != kDnnFormat) throw std::runtime_error("checkpoint: not a DNN detector");
    if (j.value("version", 0) != 1) throw std::runtime_error("checkpoint: unsupported DNN detector version");
    std::vector<nn::Mlp<float>> models;
    for (const auto& jm : j.at("models")) models.push_back(nn::mlp_from_json<float>(jm));
    return DnnDetector(std::move(models), j.at("subcarriers").get<std::size_t>(),
                       j.at("bits_per_symbol").get<std::size_t>());
  }

 private:
  std::vector<nn::Mlp<float>> models_;
  std::size_t subcarriers_;
  std::size_t bits_per_symbol_;
};

/// Examples generated by simulating frames at `snr_db`; every data symbol of a
/// frame becomes one example. Frame f of epoch e uses stream (e, f).
inline nn::Dataset<float> make_dnn_dataset(const LinkSetup& s, std::size_t examples, double snr_db,
                                           std::uint64_t seed, std::size_t epoch) {
  const std::size_t n = s.subcarriers();
  const std::size_t bits = n * s.bits_per_symbol();
  nn::Dataset<float> d;
  d.features.resize(static_cast<Eigen::Index>(4 * n), static_cast<Eigen::Index>(examples));
  d.labels.resize(static_cast<Eigen::Index>(bits), static_cast<Eigen::Index>(examples));
  std::size_t filled = 0;
  for (std::size_t f = 0; filled < examples; ++f) {
    RngStream rng(seed, stream_id(0xda7a, epoch, f));
    const FrameTrial t = simulate_frame(s, snr_db, rng);
    for (std::size_t ds = 0; ds < s.layout.data_symbols && filled < examples; ++ds, ++filled) {
      const auto col = static_cast<Eigen::Index>(filled);
      write_features(t.reception.rx, ds + 1, d.features, col);
      const auto b = t.data_bits(ds, s.bits_per_symbol());
      for (std::size_t i = 0; i < bits; ++i) d.labels(static_cast<Eigen::Index>(i), col) = b[i];
    }
  }
  return d;
}

/// Per-epoch mean training loss of each group model.
struct DnnTrainingLog {
  std::vector<std::vector<double>> loss;  ///< [group][epoch]
};

using EpochCallback = std::function<void(std::size_t epoch, std::size_t group, double loss)>;

/// Trains every group model of the configured detector in lockstep over one
/// shared data stream at dnn.snr_train_db. Model g is initialised from
/// stream (g) of the seed.
inline DnnDetector train_dnn(const ExperimentConfig& c, DnnTrainingLog* log = nullptr,
                             const EpochCallback& on_epoch = {}) {
  const LinkSetup s = LinkSetup::from_config(c);
  nn::TrainConfig tc = c.dnn.train;
  tc.seed = c.seed;
  tc.validate();
  const std::size_t n = s.subcarriers();
  const std::size_t group = c.dnn_group_subcarriers();
  const std::size_t groups = n / group;
  const std::size_t out_bits = group * s.bits_per_symbol();

  std::vector<nn::Mlp<float>> models;
  models.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    models.push_back(nn::Mlp<float>::relu_sigmoid(4 * n, c.dnn.hidden, out_bits));
    RngStream init(tc.seed, stream_id(0x1417, g));
    models.back().initialize(init);
  }
  std::vector<nn::Trainer<float>> trainers;
  trainers.reserve(groups);
  for (auto& m : models) trainers.emplace_back(m, tc);
  if (log) log->loss.assign(groups, {});

  RngStream shuffle(tc.seed, stream_id(0x5417));
  nn::Dataset<float> data;
  std::vector<std::size_t> order;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    if (epoch == 0 || tc.regenerate_each_epoch) {
      data = make_dnn_dataset(s, tc.dataset_size, tc.snr_train_db, tc.seed, epoch);
      order.resize(data.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
    }
    if (!tc.regenerate_each_epoch) shuffle.shuffle(order.begin(), order.end());
    for (std::size_t g = 0; g < groups; ++g) {
      const double loss = trainers[g].run_epoch(data.features, data.labels, g * out_bits, order);
      if (log) log->loss[g].push_back(loss);
      if (on_epoch) on_epoch(epoch, g, loss);
    }
  }
  return DnnDetector(std::move(models), n, s.bits_per_symbol());
}

/// Loads dnn.checkpoint when set, otherwise trains from the config.
inline DnnDetector obtain_dnn(const ExperimentConfig& c, DnnTrainingLog* log = nullptr,
                              const EpochCallback& on_epoch = {}) {
  if (!c.dnn.checkpoint.empty()) {
    DnnDetector d = DnnDetector::from_json(nn::read_json_file(c.dnn.checkpoint));
    if (d.subcarriers() != c.subcarriers || d.bits_per_symbol() != static_cast<std::size_t>(c.bits_per_symbol())) {
      throw std::runtime_error("checkpoint '" + c.dnn.checkpoint + "' does not match the configured frame");
    }
    return d;
  }
  return train_dnn(c, log, on_epoch);
}

}  // namespace ofdmml::harness
