#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ofdmml/neural/mlp.hpp"

namespace ofdmml::nn {

inline constexpr const char* kMlpFormat = "ofdmml-mlp";
inline constexpr int kMlpFormatVersion = 1;

/// Self-describing checkpoint: layer sizes, activation tags and every
/// parameter as a 64-bit float, per layer weights (row-major) then bias.
template <class T>
nlohmann::json to_json(const Mlp<T>& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(static_cast<double>(l.weights(r, c)));
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"inputs", l.inputs()},
                      {"outputs", l.outputs()},
                      {"activation", std::string(to_string(l.activation))},
                      {"weights", w},
                      {"bias", b}});
  }
  return {{"format", kMlpFormat}, {"version", kMlpFormatVersion}, {"sizes", m.sizes()}, {"layers", layers}};
}

template <class T>
Mlp<T> mlp_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kMlpFormat) throw std::runtime_error("checkpoint: not an MLP checkpoint");
  if (j.value("version", 0) != kMlpFormatVersion) throw std::runtime_error("checkpoint: unsupported version");
  const auto sizes = j.at("sizes").get<std::vector<std::size_t>>();
  std::vector<Activation> acts;
  for (const auto& l : j.at("layers")) acts.push_back(activation_from_string(l.at("activation").get<std::string>()));
  Mlp<T> m(sizes, acts);
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const auto& jl = j.at("layers").at(i);
    auto& l = m.layers()[i];
    const auto w = jl.at("weights").get<std::vector<double>>();
    const auto b = jl.at("bias").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(l.weights.size()) || b.size() != static_cast<std::size_t>(l.bias.size())) {
      throw std::runtime_error("checkpoint: parameter count mismatch in layer " + std::to_string(i));
    }
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = static_cast<T>(w[idx++]);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = static_cast<T>(b[static_cast<std::size_t>(r)]);
  }
  return m;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << j.dump() << '\n';
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return nlohmann::json::parse(is);
}

}  // namespace ofdmml::nn
