#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ofdmml::harness {

inline constexpr int kCsvSchemaVersion = 1;

inline constexpr const char* kCsvHeader =
    "schema_version,run_id,scenario,detector,modulation,pilots,cp_fraction,users,snr_db,trials,bits,bit_errors,ber,"
    "ber_ci95,nmse,flops_per_frame,inference_ms";

/// One (scenario, detector, SNR) result row.
struct MetricRecord {
  std::string run_id;
  std::string scenario;
  std::string detector;
  int modulation = 4;
  std::size_t pilots = 0;
  double cp_fraction = 0.0;
  std::size_t users = 0;
  double snr_db = 0.0;
  std::size_t trials = 0;
  std::uint64_t bits = 0;
  std::uint64_t bit_errors = 0;
  std::optional<double> nmse;
  double flops_per_frame = 0.0;
  std::optional<double> inference_ms;

  [[nodiscard]] double ber() const { return bits == 0 ? 0.0 : static_cast<double>(bit_errors) / static_cast<double>(bits); }
  [[nodiscard]] double ber_ci95() const;
};

/// Half-width of the normal-approximation 95% interval for a proportion.
inline double binomial_ci95(std::uint64_t errors, std::uint64_t total) {
  if (total == 0) throw std::invalid_argument("binomial_ci95: no trials");
  const double p = static_cast<double>(errors) / static_cast<double>(total);
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

inline double MetricRecord::ber_ci95() const { return bits == 0 ? 0.0 : binomial_ci95(bit_errors, bits); }

/// Running bit-error tally.
struct BerCounter {
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;

  void add(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> detected) {
    if (truth.size() != detected.size()) {
      throw std::invalid_argument("BerCounter: " + std::to_string(truth.size()) + " reference bits vs " +
                                  std::to_string(detected.size()) + " detected");
    }
    for (std::size_t i = 0; i < truth.size(); ++i) errors += (truth[i] != 0) != (detected[i] != 0) ? 1 : 0;
    bits += truth.size();
  }

  [[nodiscard]] double ber() const { return bits == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(bits); }
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline std::string format_record(const MetricRecord& r) {
  using detail::num;
  std::string s = std::to_string(kCsvSchemaVersion);
  s += ',' + r.run_id + ',' + r.scenario + ',' + r.detector + ',' + std::to_string(r.modulation) + ',' +
       std::to_string(r.pilots) + ',' + num(r.cp_fraction) + ',' + std::to_string(r.users) + ',' + num(r.snr_db) +
       ',' + std::to_string(r.trials) + ',' + std::to_string(r.bits) + ',' + std::to_string(r.bit_errors) + ',' +
       num(r.ber()) + ',' + num(r.ber_ci95()) + ',' + (r.nmse ? num(*r.nmse) : "") + ',' + num(r.flops_per_frame) +
       ',' + (r.inference_ms ? num(*r.inference_ms) : "");
  return s;
}

inline MetricRecord parse_record(const std::string& line) {
  const auto f = detail::split_csv(line);
  if (f.size() != 17) throw std::runtime_error("metrics CSV: expected 17 fields, got " + std::to_string(f.size()));
  if (f[0] != std::to_string(kCsvSchemaVersion)) throw std::runtime_error("metrics CSV: unsupported schema " + f[0]);
  try {
    MetricRecord r;
    r.run_id = f[1];
    r.scenario = f[2];
    r.detector = f[3];
    r.modulation = std::stoi(f[4]);
    r.pilots = std::stoul(f[5]);
    r.cp_fraction = std::stod(f[6]);
    r.users = std::stoul(f[7]);
    r.snr_db = std::stod(f[8]);
    r.trials = std::stoul(f[9]);
    r.bits = std::stoull(f[10]);
    r.bit_errors = std::stoull(f[11]);
    if (!f[14].empty()) r.nmse = std::stod(f[14]);
    r.flops_per_frame = std::stod(f[15]);
    if (!f[16].empty()) r.inference_ms = std::stod(f[16]);
    return r;
  } catch (const std::logic_error& e) {
    throw std::runtime_error("metrics CSV: malformed row '" + line + "': " + e.what());
  }
}

inline std::vector<MetricRecord> read_metrics(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("metrics CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("metrics CSV: header does not match schema version 1");
  std::vector<MetricRecord> out;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(parse_record(line));
  }
  return out;
}

inline std::vector<MetricRecord> read_metrics_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_metrics(is);
}

/// Append-only metrics file. The header is written once; an existing file
/// with a different header is refused.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::string path) : path_(std::move(path)) {
    const std::filesystem::path p(path_);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    if (std::filesystem::exists(p) && std::filesystem::file_size(p) > 0) {
      std::ifstream is(path_);
      std::string first;
      std::getline(is, first);
      if (first != kCsvHeader) throw std::runtime_error("'" + path_ + "' has a different CSV header");
      return;
    }
    write_block(std::string(kCsvHeader) + '\n');
  }

  /// Appends all rows with a single write.
  void append(std::span<const MetricRecord> rows) {
    std::string block;
    for (const auto& r : rows) block += format_record(r) + '\n';
    write_block(block);
  }

  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  void write_block(const std::string& block) {
    std::ofstream os(path_, std::ios::app | std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path_ + "' for appending");
    os.write(block.data(), static_cast<std::streamsize>(block.size()));
    os.flush();
    if (!os) throw std::runtime_error("write to '" + path_ + "' failed");
  }

  std::string path_;
};

}  // namespace ofdmml::harness
