#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ofdmml/elm/elm.hpp"

namespace ofdmml {

inline constexpr const char* kElmFormat = "ofdmml-elm-bank";

namespace detail {
inline std::vector<double> flat(const RMat& m) { return {m.data(), m.data() + m.size()}; }

inline RMat unflat(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols) throw std::runtime_error("ELM checkpoint: array has wrong length");
  RMat m(rows, cols);
  std::copy(v.begin(), v.end(), m.data());
  return m;
}
}  // namespace detail

/// Per-subnet (a, b, B) arrays plus the seed and configuration that built them.
inline nlohmann::json to_json(const ElmBank& bank) {
  nlohmann::json subnets = nlohmann::json::array();
  for (std::size_t k = 0; k < bank.subcarriers(); ++k) {
    const auto& s = bank.subnet(k);
    nlohmann::json js{{"input_weights", detail::flat(s.input_weights())},
                      {"biases", s.biases()},
                      {"input_scale", s.input_scale()},
                      {"trained", s.trained()}};
    if (s.trained()) js["output_weights"] = detail::flat(s.output_weights());
    subnets.push_back(std::move(js));
  }
  return {{"format", kElmFormat},
          {"version", 1},
          {"seed", bank.seed()},
          {"hidden", bank.config().hidden},
          {"activation", "radbas"},
          {"normalize_inputs", bank.config().normalize_inputs},
          {"rcond", bank.config().rcond},
          {"subnets", subnets}};
}

inline ElmBank elm_bank_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kElmFormat) throw std::runtime_error("checkpoint: not an ELM bank");
  ElmConfig cfg;
  cfg.hidden = j.at("hidden").get<std::size_t>();
  cfg.normalize_inputs = j.at("normalize_inputs").get<bool>();
  cfg.rcond = j.at("rcond").get<double>();
  std::vector<ElmSubnet> subnets;
  for (const auto& js : j.at("subnets")) {
    ElmSubnet s(detail::unflat(js.at("input_weights").get<std::vector<double>>(), cfg.hidden, 2),
                js.at("biases").get<std::vector<double>>());
    if (js.at("trained").get<bool>()) {
      s.restore(detail::unflat(js.at("output_weights").get<std::vector<double>>(), cfg.hidden, 2),
                js.at("input_scale").get<double>());
    }
    subnets.push_back(std::move(s));
  }
  return ElmBank(std::move(subnets), cfg, j.at("seed").get<std::uint64_t>());
}

}  // namespace ofdmml
