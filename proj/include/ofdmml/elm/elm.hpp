#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/modem/qam.hpp"
#include "ofdmml/numerics/linalg.hpp"
#include "ofdmml/numerics/rng.hpp"

namespace ofdmml {

/// Radial-basis activation exp(-x^2).
inline double radbas(double x) { return std::exp(-x * x); }

struct ElmConfig {
  std::size_t hidden = 50;
  /// Scale each subcarrier's samples by 1 / RMS of its received pilot block.
  bool normalize_inputs = true;
  /// Relative singular-value cutoff of the output-weight pseudoinverse;
  /// negative selects max(I, L) * machine epsilon.
  double rcond = -1.0;
};

/// [Re, Im] rows of a complex column.
inline RMat to_real_pairs(std::span<const cplx> x) {
  RMat out(x.size(), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out(i, 0) = x[i].real();
    out(i, 1) = x[i].imag();
  }
  return out;
}

inline CVec from_real_pairs(const RMat& m) {
  if (m.cols() != 2) throw std::invalid_argument("from_real_pairs: expected two columns");
  CVec out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = {m(i, 0), m(i, 1)};
  return out;
}

/// Single-hidden-layer network for one subcarrier: fixed random input weights
/// a_l (2 per node) and biases b_l, trained output weights B (L x 2).
class ElmSubnet {
 public:
  ElmSubnet() = default;
  ElmSubnet(std::size_t hidden, RngStream& rng) : input_weights_(hidden, 2), biases_(hidden) {
    if (hidden == 0) throw std::invalid_argument("ElmSubnet: zero hidden nodes");
    for (std::size_t l = 0; l < hidden; ++l) {
      input_weights_(l, 0) = rng.uniform(-1.0, 1.0);
      input_weights_(l, 1) = rng.uniform(-1.0, 1.0);
    }
    for (auto& b : biases_) b = rng.uniform(-1.0, 1.0);
  }
  ElmSubnet(RMat input_weights, std::vector<double> biases)
      : input_weights_(std::move(input_weights)), biases_(std::move(biases)) {
    if (input_weights_.cols() != 2 || input_weights_.rows() != biases_.size()) {
      throw std::invalid_argument("ElmSubnet: input weights must be L x 2 with L biases");
    }
  }

  [[nodiscard]] std::size_t hidden() const noexcept { return biases_.size(); }
  [[nodiscard]] const RMat& input_weights() const noexcept { return input_weights_; }
  [[nodiscard]] const std::vector<double>& biases() const noexcept { return biases_; }
  [[nodiscard]] const RMat& output_weights() const noexcept { return output_weights_; }
  [[nodiscard]] double input_scale() const noexcept { return input_scale_; }
  [[nodiscard]] bool trained() const noexcept { return !output_weights_.empty(); }

  /// O[i][l] = g(a_l . (s * y_i) + b_l) for inputs y_i given as I x 2 rows.
  [[nodiscard]] RMat hidden_matrix(const RMat& inputs) const {
    if (inputs.cols() != 2) throw std::invalid_argument("hidden_matrix: inputs must be I x 2");
    const std::size_t n = inputs.rows();
    const std::size_t l = hidden();
    RMat o(n, l);
    for (std::size_t i = 0; i < n; ++i) {
      const double y0 = inputs(i, 0) * input_scale_;
      const double y1 = inputs(i, 1) * input_scale_;
      auto row = o.row(i);
      for (std::size_t j = 0; j < l; ++j) {
        row[j] = radbas(input_weights_(j, 0) * y0 + input_weights_(j, 1) * y1 + biases_[j]);
      }
    }
    count(Op::real_mul, 2 * n * l + 2 * n);
    count(Op::real_add, 2 * n * l);
    count(Op::activation, n * l);
    return o;
  }

  /// B = O^+ X_pilot from received (I x 2) and transmitted (I x 2) pilots.
  void train(const RMat& received, const RMat& transmitted, const ElmConfig& cfg = {}) {
    if (received.rows() != transmitted.rows() || received.cols() != 2 || transmitted.cols() != 2) {
      throw std::invalid_argument("ElmSubnet::train: pilots must be matching I x 2 matrices");
    }
    input_scale_ = 1.0;
    if (cfg.normalize_inputs) {
      double p = 0.0;
      for (std::size_t i = 0; i < received.size(); ++i) p += received.data()[i] * received.data()[i];
      p /= static_cast<double>(received.rows());
      if (p > 0.0) input_scale_ = 1.0 / std::sqrt(p);
      count(Op::real_mul, received.size());
      count(Op::real_add, received.size());
    }
    const RMat o = hidden_matrix(received);
    output_weights_ = lstsq(o, transmitted, cfg.rcond);
  }

  /// X_hat = O B for received samples given as K x 2 rows.
  [[nodiscard]] RMat predict(const RMat& received) const {
    if (!trained()) throw std::logic_error("ElmSubnet::predict: subnet has not been trained");
    return hidden_matrix(received) * output_weights_;
  }

  void restore(RMat output_weights, double input_scale) {
    output_weights_ = std::move(output_weights);
    input_scale_ = input_scale;
  }

 private:
  RMat input_weights_;
  std::vector<double> biases_;
  RMat output_weights_;
  double input_scale_ = 1.0;
};

/// One ElmSubnet per subcarrier, all sharing the hidden size and activation.
class ElmBank {
 public:
  ElmBank(std::size_t subcarriers, ElmConfig cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {
    if (subcarriers == 0) throw std::invalid_argument("ElmBank: zero subcarriers");
    subnets_.reserve(subcarriers);
    for (std::size_t k = 0; k < subcarriers; ++k) {
      RngStream rng(seed, stream_id(0xe1e1, k));
      subnets_.emplace_back(cfg.hidden, rng);
    }
  }
  ElmBank(std::vector<ElmSubnet> subnets, ElmConfig cfg, std::uint64_t seed)
      : cfg_(cfg), seed_(seed), subnets_(std::move(subnets)) {}

  [[nodiscard]] std::size_t subcarriers() const noexcept { return subnets_.size(); }
  [[nodiscard]] const ElmConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] const ElmSubnet& subnet(std::size_t k) const { return subnets_.at(k); }
  [[nodiscard]] ElmSubnet& subnet(std::size_t k) { return subnets_.at(k); }

  /// Trains every subnet on one coherence block: `received` and
  /// `transmitted` are I x N_c (pilot instances by subcarrier).
  void train(const CMat& received, const CMat& transmitted) {
    check_width(received, "train");
    check_width(transmitted, "train");
    if (received.rows() != transmitted.rows()) throw std::invalid_argument("ElmBank::train: pilot counts differ");
    for (std::size_t k = 0; k < subnets_.size(); ++k) {
      subnets_[k].train(to_real_pairs(received.col(k)), to_real_pairs(transmitted.col(k)), cfg_);
    }
  }

  /// Soft symbol estimates (K x N_c) for received data (K x N_c).
  [[nodiscard]] CMat detect(const CMat& received) const {
    check_width(received, "detect");
    CMat out(received.rows(), received.cols());
    for (std::size_t k = 0; k < subnets_.size(); ++k) {
      if (!subnets_[k].trained()) {
        throw std::logic_error("ElmBank::detect: subnet " + std::to_string(k) + " has not been trained");
      }
      const CVec est = from_real_pairs(subnets_[k].predict(to_real_pairs(received.col(k))));
      for (std::size_t i = 0; i < est.size(); ++i) out(i, k) = est[i];
    }
    return out;
  }

  /// Hard bits, symbol-major (row by row, subcarrier by subcarrier).
  [[nodiscard]] Bits detect_bits(const CMat& received, const QamConstellation& c) const {
    const CMat soft = detect(received);
    return demap_symbols(std::span<const cplx>(soft.data(), soft.size()), c);
  }

 private:
  void check_width(const CMat& m, const char* what) const {
    if (m.cols() != subnets_.size()) {
      throw std::invalid_argument(std::string("ElmBank::") + what + ": expected " + std::to_string(subnets_.size()) +
                                  " subcarrier columns, got " + std::to_string(m.cols()));
    }
  }

  ElmConfig cfg_;
  std::uint64_t seed_;
  std::vector<ElmSubnet> subnets_;
};

}  // namespace ofdmml
