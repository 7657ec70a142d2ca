#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ofdmml/channel/channel.hpp"
#include "ofdmml/elm/elm.hpp"
#include "ofdmml/neural/checkpoint.hpp"
#include "ofdmml/neural/trainer.hpp"

namespace ofdmml::harness {

inline const std::vector<std::string> kDetectorIds = {"perfect", "ls", "mmse", "dnn", "elm"};

/// How the NMSE column aggregates estimates over a campaign.
enum class NmseMode {
  pooled,         ///< sum of squared errors over all blocks / sum of channel energy
  per_block_mean  ///< mean over blocks of each block's normalised error
};

struct ChannelConfig {
  std::size_t taps = 8;
  double decay_db = 20.0;
  std::vector<double> pdp;  ///< explicit weights; overrides taps/decay_db when nonempty
  double path_loss_exponent = -3.0;
  double cell_radius_m = 500.0;
  double min_distance_m = 10.0;
  double coherence_ms = 5.0;

  [[nodiscard]] ChannelProfile profile() const {
    ChannelProfile p = pdp.empty() ? ChannelProfile::exponential(taps, decay_db) : ChannelProfile::from_weights(pdp);
    p.path_loss_exponent = path_loss_exponent;
    p.cell_radius_m = cell_radius_m;
    p.min_distance_m = min_distance_m;
    p.coherence_ms = coherence_ms;
    return p;
  }
};

struct DnnConfig {
  std::vector<std::size_t> hidden{500, 250, 120};
  std::size_t output_bits = 64;
  nn::TrainConfig train{};
  std::string checkpoint;  ///< load instead of training when nonempty
};

struct ElmSection {
  std::size_t hidden = 50;
  std::size_t pilots = 100;
  std::size_t data = 400;
  bool normalize_inputs = true;
  double rcond = -1.0;

  [[nodiscard]] ElmConfig elm_config() const { return {hidden, normalize_inputs, rcond}; }
};

/// Every experiment parameter, with defaults matching the reference setup.
struct ExperimentConfig {
  std::string scenario = "baseline";
  std::uint64_t seed = 1;
  int modulation = 4;
  std::size_t users = 4;
  std::size_t subcarriers = 64;
  std::size_t pilots = 64;
  double cp_fraction = 0.25;
  std::size_t data_symbols = 1;
  std::vector<double> snr_db{5.0, 10.0, 15.0, 20.0, 25.0};
  std::vector<std::string> detectors = kDetectorIds;
  std::size_t trials = 10'000;
  std::size_t elm_trials = 1'000;
  std::size_t selected_per_user = 4;
  NmseMode nmse = NmseMode::pooled;
  std::string output_dir = "out";
  ChannelConfig channel{};
  DnnConfig dnn{};
  ElmSection elm{};

  [[nodiscard]] bool wants(const std::string& detector) const {
    for (const auto& d : detectors)
      if (d == detector) return true;
    return false;
  }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (scenario.empty() || scenario.find_first_of(",\"\n/\\") != std::string::npos) {
      fail("scenario must be a nonempty name without commas, quotes, slashes or newlines");
    }
    if (modulation != 4 && modulation != 16 && modulation != 32) fail("modulation must be 4, 16 or 32");
    if (users == 0 || users > 8) fail("users must be in [1, 8]");
    if (subcarriers == 0 || subcarriers % 4 != 0) fail("subcarriers must be a positive multiple of 4");
    if (pilots == 0 || pilots > subcarriers) fail("pilots must be in [1, subcarriers]");
    if (cp_fraction < 0.0 || cp_fraction > 1.0) fail("cp_fraction must be in [0, 1]");
    if (data_symbols == 0) fail("data_symbols must be positive");
    if (snr_db.empty()) fail("snr_db must list at least one point");
    if (trials == 0 || elm_trials == 0) fail("trials and elm_trials must be positive");
    if (selected_per_user == 0 || selected_per_user > subcarriers / 4) fail("selected_per_user out of range");
    std::set<std::string> seen;
    for (const auto& d : detectors) {
      bool known = false;
      for (const auto& k : kDetectorIds) known = known || d == k;
      if (!known) fail("unknown detector '" + d + "'");
      if (!seen.insert(d).second) fail("detector '" + d + "' listed twice");
    }
    if (channel.pdp.empty() && channel.taps == 0) fail("channel.taps must be positive");
    channel.profile().validate();
    if (!(channel.min_distance_m > 0.0) || channel.min_distance_m >= channel.cell_radius_m) {
      fail("channel distances need 0 < min_distance_m < cell_radius_m");
    }
    if (dnn.hidden.empty()) fail("dnn.hidden must list at least one layer");
    for (auto h : dnn.hidden)
      if (h == 0) fail("dnn.hidden sizes must be positive");
    (void)dnn_group_subcarriers();
    dnn.train.validate();
    if (elm.hidden == 0 || elm.pilots == 0 || elm.data == 0) fail("elm sizes must be positive");
  }

  [[nodiscard]] int bits_per_symbol() const {
    return modulation == 4 ? 2 : modulation == 16 ? 4 : 5;
  }

  /// Subcarriers covered by one DNN instance (output_bits / log2 M).
  [[nodiscard]] std::size_t dnn_group_subcarriers() const {
    const auto k = static_cast<std::size_t>(bits_per_symbol());
    if (dnn.output_bits == 0 || dnn.output_bits % k != 0) {
      throw std::invalid_argument("config: dnn.output_bits must be a positive multiple of log2(modulation)");
    }
    const std::size_t g = dnn.output_bits / k;
    if (g > subcarriers || subcarriers % g != 0) {
      throw std::invalid_argument("config: dnn group of " + std::to_string(g) + " subcarriers does not tile " +
                                  std::to_string(subcarriers));
    }
    return g;
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw std::invalid_argument("config: unknown key '" + where + item.key() + "'");
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: bad value for '" + where + key + "': " + e.what());
  }
}

}  // namespace detail

inline std::string to_string(NmseMode m) { return m == NmseMode::pooled ? "pooled" : "per_block_mean"; }

inline NmseMode nmse_mode_from_string(const std::string& s) {
  if (s == "pooled") return NmseMode::pooled;
  if (s == "per_block_mean") return NmseMode::per_block_mean;
  throw std::invalid_argument("config: nmse must be 'pooled' or 'per_block_mean', got '" + s + "'");
}

/// Parses a configuration document. Missing keys keep their defaults; unknown
/// keys at any level are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::read;
  ExperimentConfig c;
  detail::reject_unknown(j,
                         {"scenario", "seed", "modulation", "users", "subcarriers", "pilots", "cp_fraction",
                          "data_symbols", "snr_db", "detectors", "trials", "elm_trials", "selected_per_user", "nmse",
                          "output_dir", "channel", "dnn", "elm"},
                         "");
  read(j, "scenario", c.scenario, "");
  read(j, "seed", c.seed, "");
  read(j, "modulation", c.modulation, "");
  read(j, "users", c.users, "");
  read(j, "subcarriers", c.subcarriers, "");
  read(j, "pilots", c.pilots, "");
  read(j, "cp_fraction", c.cp_fraction, "");
  read(j, "data_symbols", c.data_symbols, "");
  read(j, "snr_db", c.snr_db, "");
  read(j, "detectors", c.detectors, "");
  read(j, "trials", c.trials, "");
  read(j, "elm_trials", c.elm_trials, "");
  read(j, "selected_per_user", c.selected_per_user, "");
  read(j, "output_dir", c.output_dir, "");
  if (j.contains("nmse")) {
    std::string s;
    read(j, "nmse", s, "");
    c.nmse = nmse_mode_from_string(s);
  }
  if (j.contains("channel")) {
    const auto& jc = j.at("channel");
    detail::reject_unknown(jc,
                           {"taps", "decay_db", "pdp", "path_loss_exponent", "cell_radius_m", "min_distance_m",
                            "coherence_ms"},
                           "channel.");
    read(jc, "taps", c.channel.taps, "channel.");
    read(jc, "decay_db", c.channel.decay_db, "channel.");
    read(jc, "pdp", c.channel.pdp, "channel.");
    read(jc, "path_loss_exponent", c.channel.path_loss_exponent, "channel.");
    read(jc, "cell_radius_m", c.channel.cell_radius_m, "channel.");
    read(jc, "min_distance_m", c.channel.min_distance_m, "channel.");
    read(jc, "coherence_ms", c.channel.coherence_ms, "channel.");
  }
  if (j.contains("dnn")) {
    const auto& jd = j.at("dnn");
    detail::reject_unknown(jd,
                           {"hidden", "output_bits", "epochs", "batch_size", "learning_rate", "beta1", "beta2",
                            "epsilon", "snr_train_db", "dataset_size", "regenerate_each_epoch", "checkpoint"},
                           "dnn.");
    auto& t = c.dnn.train;
    read(jd, "hidden", c.dnn.hidden, "dnn.");
    read(jd, "output_bits", c.dnn.output_bits, "dnn.");
    read(jd, "epochs", t.epochs, "dnn.");
    read(jd, "batch_size", t.batch_size, "dnn.");
    read(jd, "learning_rate", t.adam.learning_rate, "dnn.");
    read(jd, "beta1", t.adam.beta1, "dnn.");
    read(jd, "beta2", t.adam.beta2, "dnn.");
    read(jd, "epsilon", t.adam.epsilon, "dnn.");
    read(jd, "snr_train_db", t.snr_train_db, "dnn.");
    read(jd, "dataset_size", t.dataset_size, "dnn.");
    read(jd, "regenerate_each_epoch", t.regenerate_each_epoch, "dnn.");
    read(jd, "checkpoint", c.dnn.checkpoint, "dnn.");
  }
  if (j.contains("elm")) {
    const auto& je = j.at("elm");
    detail::reject_unknown(je, {"hidden", "pilots", "data", "normalize_inputs", "rcond"}, "elm.");
    read(je, "hidden", c.elm.hidden, "elm.");
    read(je, "pilots", c.elm.pilots, "elm.");
    read(je, "data", c.elm.data, "elm.");
    read(je, "normalize_inputs", c.elm.normalize_inputs, "elm.");
    read(je, "rcond", c.elm.rcond, "elm.");
  }
  c.validate();
  return c;
}

/// Full document with every field written out, in a fixed key order.
inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  const auto& t = c.dnn.train;
  nlohmann::ordered_json ch{{"taps", c.channel.taps},
                            {"decay_db", c.channel.decay_db},
                            {"pdp", c.channel.pdp},
                            {"path_loss_exponent", c.channel.path_loss_exponent},
                            {"cell_radius_m", c.channel.cell_radius_m},
                            {"min_distance_m", c.channel.min_distance_m},
                            {"coherence_ms", c.channel.coherence_ms}};
  nlohmann::ordered_json dnn{{"hidden", c.dnn.hidden},
                             {"output_bits", c.dnn.output_bits},
                             {"epochs", t.epochs},
                             {"batch_size", t.batch_size},
                             {"learning_rate", t.adam.learning_rate},
                             {"beta1", t.adam.beta1},
                             {"beta2", t.adam.beta2},
                             {"epsilon", t.adam.epsilon},
                             {"snr_train_db", t.snr_train_db},
                             {"dataset_size", t.dataset_size},
                             {"regenerate_each_epoch", t.regenerate_each_epoch},
                             {"checkpoint", c.dnn.checkpoint}};
  nlohmann::ordered_json elm{{"hidden", c.elm.hidden},
                             {"pilots", c.elm.pilots},
                             {"data", c.elm.data},
                             {"normalize_inputs", c.elm.normalize_inputs},
                             {"rcond", c.elm.rcond}};
  return {{"scenario", c.scenario},
          {"seed", c.seed},
          {"modulation", c.modulation},
          {"users", c.users},
          {"subcarriers", c.subcarriers},
          {"pilots", c.pilots},
          {"cp_fraction", c.cp_fraction},
          {"data_symbols", c.data_symbols},
          {"snr_db", c.snr_db},
          {"detectors", c.detectors},
          {"trials", c.trials},
          {"elm_trials", c.elm_trials},
          {"selected_per_user", c.selected_per_user},
          {"nmse", to_string(c.nmse)},
          {"output_dir", c.output_dir},
          {"channel", ch},
          {"dnn", dnn},
          {"elm", elm}};
}

/// Reads a JSON config file, then applies the OFDMML_OUTPUT_DIR override.
inline ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig c = config_from_json(nn::read_json_file(path));
  if (const char* env = std::getenv("OFDMML_OUTPUT_DIR"); env != nullptr && *env != '\0') c.output_dir = env;
  return c;
}

/// Config with defaults plus the OFDMML_OUTPUT_DIR override.
inline ExperimentConfig default_config() {
  ExperimentConfig c;
  if (const char* env = std::getenv("OFDMML_OUTPUT_DIR"); env != nullptr && *env != '\0') c.output_dir = env;
  return c;
}

/// 16-hex-digit FNV-1a digest of the simulation-relevant fields. The output
/// directory and detector selection do not affect the digest.
inline std::string run_id(const ExperimentConfig& c) {
  auto j = to_json(c);
  j.erase("output_dir");
  j.erase("detectors");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ofdmml::harness
