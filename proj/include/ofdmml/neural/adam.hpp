#pragma once

#include <cmath>

#include "ofdmml/neural/mlp.hpp"

namespace ofdmml::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates with bias correction.
template <class T>
class AdamState {
 public:
  explicit AdamState(const Mlp<T>& model) {
    for (const auto& l : model.layers()) {
      m_w_.push_back(Mat<T>::Zero(l.weights.rows(), l.weights.cols()));
      v_w_.push_back(Mat<T>::Zero(l.weights.rows(), l.weights.cols()));
      m_b_.push_back(Vec<T>::Zero(l.bias.size()));
      v_b_.push_back(Vec<T>::Zero(l.bias.size()));
    }
  }

  [[nodiscard]] long step_count() const noexcept { return t_; }

  void step(Mlp<T>& model, const Gradients<T>& g, const AdamConfig& cfg) {
    ++t_;
    const T b1 = static_cast<T>(cfg.beta1);
    const T b2 = static_cast<T>(cfg.beta2);
    const T c1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(t_)));
    const T c2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(t_)));
    const T lr = static_cast<T>(cfg.learning_rate);
    const T eps = static_cast<T>(cfg.epsilon);
    auto& layers = model.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      update(layers[i].weights, g.weights[i], m_w_[i], v_w_[i], b1, b2, c1, c2, lr, eps);
      update(layers[i].bias, g.bias[i], m_b_[i], v_b_[i], b1, b2, c1, c2, lr, eps);
    }
  }

 private:
  template <class P, class G, class S>
  static void update(P& param, const G& grad, S& m, S& v, T b1, T b2, T c1, T c2, T lr, T eps) {
    m = b1 * m + (T(1) - b1) * grad;
    v = (b2 * v.array() + (T(1) - b2) * grad.array().square()).matrix();
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }

  long t_ = 0;
  std::vector<Mat<T>> m_w_, v_w_;
  std::vector<Vec<T>> m_b_, v_b_;
};

}  // namespace ofdmml::nn
