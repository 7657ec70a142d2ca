#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ofdmml/flops.hpp"
#include "ofdmml/numerics/rng.hpp"

namespace ofdmml::nn {

enum class Activation { identity, relu, sigmoid };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

/// Raised when training produces non-finite gradients or a runaway loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
struct DenseLayer {
  Mat<T> weights;  ///< out x in
  Vec<T> bias;     ///< out
  Activation activation = Activation::relu;

  [[nodiscard]] std::size_t inputs() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  [[nodiscard]] std::size_t outputs() const noexcept { return static_cast<std::size_t>(weights.rows()); }
};

template <class T>
void activate_inplace(Mat<T>& z, Activation a) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: z = z.cwiseMax(T(0)); break;
    case Activation::sigmoid: z = (T(1) + (-z.array()).exp()).inverse().matrix(); break;
  }
}

/// Gradients with the same shapes as the model's layers.
template <class T>
struct Gradients {
  std::vector<Mat<T>> weights;
  std::vector<Vec<T>> bias;
  T loss = T(0);
};

/// Fully connected network; batches are column-major (one example per column).
template <class T>
class Mlp {
 public:
  Mlp() = default;

  Mlp(const std::vector<std::size_t>& sizes, const std::vector<Activation>& activations) {
    if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    if (activations.size() != sizes.size() - 1) throw std::invalid_argument("Mlp: one activation per layer required");
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      if (sizes[i] == 0 || sizes[i + 1] == 0) throw std::invalid_argument("Mlp: zero-width layer");
      DenseLayer<T> layer;
      layer.weights = Mat<T>::Zero(static_cast<Eigen::Index>(sizes[i + 1]), static_cast<Eigen::Index>(sizes[i]));
      layer.bias = Vec<T>::Zero(static_cast<Eigen::Index>(sizes[i + 1]));
      layer.activation = activations[i];
      layers_.push_back(std::move(layer));
    }
  }

  /// ReLU on every hidden layer, logistic sigmoid on the output.
  static Mlp relu_sigmoid(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output) {
    std::vector<std::size_t> sizes{input};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(output);
    std::vector<Activation> acts(hidden.size(), Activation::relu);
    acts.push_back(Activation::sigmoid);
    return Mlp(sizes, acts);
  }

  /// Zero-mean Gaussian weights with standard deviation 1/sqrt(fan_in), zero biases.
  void initialize(RngStream& rng) {
    for (auto& layer : layers_) {
      const double sd = 1.0 / std::sqrt(static_cast<double>(layer.inputs()));
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = static_cast<T>(sd * rng.normal());
      layer.bias.setZero();
    }
  }

  [[nodiscard]] const std::vector<DenseLayer<T>>& layers() const noexcept { return layers_; }
  [[nodiscard]] std::vector<DenseLayer<T>>& layers() noexcept { return layers_; }
  [[nodiscard]] std::size_t input_size() const { return layers_.front().inputs(); }
  [[nodiscard]] std::size_t output_size() const { return layers_.back().outputs(); }

  [[nodiscard]] std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s{input_size()};
    for (const auto& l : layers_) s.push_back(l.outputs());
    return s;
  }

  [[nodiscard]] std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
  }

  /// Flat parameter view in document order: per layer, weights row-major then bias.
  [[nodiscard]] T& parameter(std::size_t index) {
    for (auto& l : layers_) {
      const auto nw = static_cast<std::size_t>(l.weights.size());
      if (index < nw) {
        const auto r = static_cast<Eigen::Index>(index / l.inputs());
        const auto c = static_cast<Eigen::Index>(index % l.inputs());
        return l.weights(r, c);
      }
      index -= nw;
      if (index < static_cast<std::size_t>(l.bias.size())) return l.bias(static_cast<Eigen::Index>(index));
      index -= static_cast<std::size_t>(l.bias.size());
    }
    throw std::out_of_range("Mlp::parameter: index out of range");
  }

  [[nodiscard]] bool all_finite() const {
    for (const auto& l : layers_)
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

  [[nodiscard]] Mat<T> forward(const Mat<T>& x) const {
    check_input(x);
    Mat<T> a = x;
    for (const auto& l : layers_) {
      Mat<T> z = l.weights * a;
      z.colwise() += l.bias;
      activate_inplace(z, l.activation);
      count_layer(l, static_cast<std::size_t>(x.cols()));
      a = std::move(z);
    }
    return a;
  }

  /// Loss and gradients of the mean squared error over the batch and outputs.
  [[nodiscard]] Gradients<T> backward(const Mat<T>& x, const Mat<T>& labels) const {
    check_input(x);
    if (labels.rows() != static_cast<Eigen::Index>(output_size()) || labels.cols() != x.cols()) {
      throw std::invalid_argument("Mlp::backward: label shape does not match output");
    }
    if (x.cols() == 0) throw std::invalid_argument("Mlp::backward: empty batch");
    const std::size_t n_layers = layers_.size();
    std::vector<Mat<T>> acts(n_layers + 1);
    acts[0] = x;
    for (std::size_t i = 0; i < n_layers; ++i) {
      Mat<T> z = layers_[i].weights * acts[i];
      z.colwise() += layers_[i].bias;
      activate_inplace(z, layers_[i].activation);
      acts[i + 1] = std::move(z);
    }
    const Mat<T>& out = acts.back();
    const T denom = static_cast<T>(out.size());
    Gradients<T> g;
    g.weights.resize(n_layers);
    g.bias.resize(n_layers);
    Mat<T> diff = out - labels;
    g.loss = diff.squaredNorm() / denom;
    Mat<T> delta = (T(2) / denom) * diff;  // dL/da for the output layer
    for (std::size_t ii = n_layers; ii-- > 0;) {
      const auto& l = layers_[ii];
      const Mat<T>& a = acts[ii + 1];
      switch (l.activation) {
        case Activation::identity: break;
        case Activation::relu: delta = (a.array() > T(0)).select(delta, T(0)); break;
        case Activation::sigmoid: delta = (delta.array() * a.array() * (T(1) - a.array())).matrix(); break;
      }
      g.weights[ii].noalias() = delta * acts[ii].transpose();
      g.bias[ii] = delta.rowwise().sum();
      if (ii > 0) {
        Mat<T> prev = l.weights.transpose() * delta;
        delta = std::move(prev);
      }
    }
    for (std::size_t i = 0; i < n_layers; ++i) {
      if (!g.weights[i].allFinite() || !g.bias[i].allFinite()) {
        throw TrainingDiverged("Mlp::backward: non-finite gradient in layer " + std::to_string(i));
      }
    }
    return g;
  }

 private:
  void check_input(const Mat<T>& x) const {
    if (layers_.empty()) throw std::logic_error("Mlp: model has no layers");
    if (x.rows() != static_cast<Eigen::Index>(input_size())) {
      throw std::invalid_argument("Mlp: feature length " + std::to_string(x.rows()) + " does not match input layer " +
                                  std::to_string(input_size()));
    }
  }

  static void count_layer(const DenseLayer<T>& l, std::size_t batch) {
    const auto macs = static_cast<std::uint64_t>(l.inputs() * l.outputs() * batch);
    count(Op::real_mul, macs);
    count(Op::real_add, macs + l.outputs() * batch);
    if (l.activation != Activation::identity) count(Op::activation, l.outputs() * batch);
  }

  std::vector<DenseLayer<T>> layers_;
};

/// Mean of squared differences over all entries.
template <class T>
T mse_loss(const Mat<T>& predictions, const Mat<T>& labels) {
  if (predictions.rows() != labels.rows() || predictions.cols() != labels.cols()) {
    throw std::invalid_argument("mse_loss: shape mismatch");
  }
  if (predictions.size() == 0) throw std::invalid_argument("mse_loss: empty batch");
  return (predictions - labels).squaredNorm() / static_cast<T>(predictions.size());
}

/// Output > 0.5 maps to bit 1; everything else, including exactly 0.5, to 0.
template <class T>
std::vector<std::uint8_t> threshold_bits(const Eigen::Ref<const Vec<T>>& outputs) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(outputs.size()));
  for (Eigen::Index i = 0; i < outputs.size(); ++i) bits[static_cast<std::size_t>(i)] = outputs(i) > T(0.5) ? 1 : 0;
  return bits;
}

/// Copies a model into another scalar type.
template <class To, class From>
Mlp<To> cast_model(const Mlp<From>& m) {
  std::vector<Activation> acts;
  for (const auto& l : m.layers()) acts.push_back(l.activation);
  Mlp<To> out(m.sizes(), acts);
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    out.layers()[i].weights = m.layers()[i].weights.template cast<To>();
    out.layers()[i].bias = m.layers()[i].bias.template cast<To>();
  }
  return out;
}

}  // namespace ofdmml::nn
