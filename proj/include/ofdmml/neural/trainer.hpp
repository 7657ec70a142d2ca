#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "ofdmml/neural/adam.hpp"
#include "ofdmml/neural/mlp.hpp"

namespace ofdmml::nn {

struct TrainConfig {
  std::size_t epochs = 1000;
  std::size_t batch_size = 250;
  AdamConfig adam{};
  double snr_train_db = 20.0;
  std::size_t dataset_size = 1'000'000;
  std::uint64_t seed = 1;
  /// Draw a fresh dataset every epoch instead of reshuffling a fixed one.
  bool regenerate_each_epoch = true;
  double divergence_threshold = 1e3;

  void validate() const {
    if (epochs == 0 || batch_size == 0 || dataset_size == 0) {
      throw std::invalid_argument("TrainConfig: epochs, batch size and dataset size must be positive");
    }
    if (batch_size > dataset_size) throw std::invalid_argument("TrainConfig: batch size exceeds dataset size");
    if (!(adam.learning_rate > 0.0) || !(adam.beta1 > 0.0) || !(adam.beta2 > 0.0) || !(adam.epsilon > 0.0)) {
      throw std::invalid_argument("TrainConfig: Adam parameters must be positive");
    }
  }
};

/// Sets flush-to-zero and denormals-are-zero for the current thread while in
/// scope (no-op without SSE2).
class ScopedFlushDenormals {
 public:
  ScopedFlushDenormals() {
#if defined(__SSE2__)
    saved_ = _mm_getcsr();
    _mm_setcsr(saved_ | 0x8040u);
#endif
  }
  ~ScopedFlushDenormals() {
#if defined(__SSE2__)
    _mm_setcsr(saved_);
#endif
  }
  ScopedFlushDenormals(const ScopedFlushDenormals&) = delete;
  ScopedFlushDenormals& operator=(const ScopedFlushDenormals&) = delete;

 private:
  unsigned saved_ = 0;
};

/// Column-major examples: features (inputs x N) and labels (outputs x N).
template <class T>
struct Dataset {
  Mat<T> features;
  Mat<T> labels;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

/// Mini-batch Adam over a model. Holds the optimiser state so several
/// models can be advanced epoch by epoch over a shared data stream.
template <class T>
class Trainer {
 public:
  Trainer(Mlp<T>& model, TrainConfig cfg) : model_(&model), cfg_(cfg), adam_(model) { cfg_.validate(); }

  /// One pass over `features` and the label rows [label_offset, label_offset +
  /// outputs) in the order given by `order`. Returns the example-weighted mean loss.
  double run_epoch(const Mat<T>& features, const Mat<T>& labels, std::size_t label_offset,
                   const std::vector<std::size_t>& order) {
    const std::size_t n = order.size();
    const auto in = features.rows();
    const auto out = static_cast<Eigen::Index>(model_->output_size());
    if (label_offset + static_cast<std::size_t>(out) > static_cast<std::size_t>(labels.rows())) {
      throw std::invalid_argument("Trainer: label rows out of range");
    }
    const ScopedFlushDenormals ftz;
    double total = 0.0;
    Mat<T> xb;
    Mat<T> yb;
    for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
      const std::size_t b = std::min(cfg_.batch_size, n - start);
      xb.resize(in, static_cast<Eigen::Index>(b));
      yb.resize(out, static_cast<Eigen::Index>(b));
      for (std::size_t j = 0; j < b; ++j) {
        const auto src = static_cast<Eigen::Index>(order[start + j]);
        xb.col(static_cast<Eigen::Index>(j)) = features.col(src);
        yb.col(static_cast<Eigen::Index>(j)) = labels.block(static_cast<Eigen::Index>(label_offset), src, out, 1);
      }
      const Gradients<T> g = model_->backward(xb, yb);
      const double loss = static_cast<double>(g.loss);
      if (!std::isfinite(loss) || loss > cfg_.divergence_threshold) {
        throw TrainingDiverged("training diverged: batch loss " + std::to_string(loss));
      }
      adam_.step(*model_, g, cfg_.adam);
      total += loss * static_cast<double>(b);
    }
    return total / static_cast<double>(n);
  }

  [[nodiscard]] const TrainConfig& config() const noexcept { return cfg_; }

 private:
  Mlp<T>* model_;
  TrainConfig cfg_;
  AdamState<T> adam_;
};

/// Produces the dataset for an epoch. Called once when the dataset is fixed.
template <class T>
using DatasetSource = std::function<Dataset<T>(std::size_t epoch)>;

template <class T>
struct TrainResult {
  Mlp<T> model;
  std::vector<double> loss_curve;  ///< mean training loss per epoch
};

/// Initialises `model` from the seed and trains it offline.
template <class T>
TrainResult<T> train(Mlp<T> model, const TrainConfig& cfg, const std::type_identity_t<DatasetSource<T>>& source,
                     const std::function<void(std::size_t, double)>& on_epoch = {}) {
  cfg.validate();
  TrainResult<T> result{std::move(model), {}};
  RngStream init_rng(cfg.seed, stream_id(0x1417, 0));
  result.model.initialize(init_rng);
  Trainer<T> trainer(result.model, cfg);
  RngStream shuffle_rng(cfg.seed, stream_id(0x5417, 0));
  Dataset<T> data;
  std::vector<std::size_t> order;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch == 0 || cfg.regenerate_each_epoch) {
      data = source(epoch);
      if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
      order.resize(data.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
    }
    if (!cfg.regenerate_each_epoch) shuffle_rng.shuffle(order.begin(), order.end());
    const double loss = trainer.run_epoch(data.features, data.labels, 0, order);
    result.loss_curve.push_back(loss);
    if (on_epoch) on_epoch(epoch, loss);
  }
  return result;
}

}  // namespace ofdmml::nn
