#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ofdmml/harness/metrics.hpp"
#include "ofdmml/harness/theory.hpp"

namespace ofdmml::harness {

struct Curve {
  std::string label;
  std::vector<std::pair<double, double>> points;  ///< (SNR dB, BER), ascending SNR
};

/// Measured curves of one scenario, one per detector in order of first
/// appearance. Repeated (detector, SNR) rows are pooled by bit counts.
inline std::vector<Curve> measured_curves(const std::vector<MetricRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::pair<std::uint64_t, std::uint64_t>>> acc;
  for (const auto& r : records) {
    if (!acc.count(r.detector)) order.push_back(r.detector);
    auto& cell = acc[r.detector][r.snr_db];
    cell.first += r.bit_errors;
    cell.second += r.bits;
  }
  std::vector<Curve> out;
  for (const auto& d : order) {
    Curve c{d, {}};
    for (const auto& [snr, eb] : acc[d]) {
      if (eb.second > 0) c.points.push_back({snr, static_cast<double>(eb.first) / static_cast<double>(eb.second)});
    }
    out.push_back(std::move(c));
  }
  return out;
}

/// theoretical_ber at every SNR present in the records.
inline Curve theory_curve(const std::vector<MetricRecord>& records) {
  if (records.empty()) throw std::invalid_argument("theory_curve: no records");
  std::vector<double> snrs;
  for (const auto& r : records) snrs.push_back(r.snr_db);
  std::sort(snrs.begin(), snrs.end());
  snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());
  Curve c{"theory", {}};
  for (double s : snrs) c.points.push_back({s, theoretical_ber_db(s, records.front().modulation)});
  return c;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                                           "#e377c2", "#17becf"};

}  // namespace detail

/// Log-scale BER versus SNR chart of one scenario with the theoretical
/// curve dashed. Zero-BER points are omitted from their curve.
inline std::string render_ber_svg(const std::string& title, const std::vector<MetricRecord>& records) {
  if (records.empty()) throw std::invalid_argument("render_ber_svg: no records");
  std::vector<Curve> curves = measured_curves(records);
  curves.push_back(theory_curve(records));

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : curves)
    for (const auto& [x, y] : c.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      if (y > 0.0) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  if (xmax <= xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymin > ymax) {
    ymin = 1e-6;
    ymax = 0.5;
  }
  const double dlo = std::floor(std::log10(ymin));
  double dhi = std::ceil(std::log10(ymax));
  if (dhi <= dlo) dhi = dlo + 1.0;

  constexpr double W = 640, H = 480, L = 80, R = 160, T = 40, B = 60;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return T + (dhi - std::log10(y)) / (dhi - dlo) * (H - T - B); };
  using detail::fmt;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
       detail::xml_escape(title) + "</text>\n";
  s += "<rect x=\"" + fmt(L) + "\" y=\"" + fmt(T) + "\" width=\"" + fmt(W - L - R) + "\" height=\"" + fmt(H - T - B) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = dlo; d <= dhi; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    s += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(W - R) + "\" y2=\"" + fmt(y) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + fmt(L - 6) + "\" y=\"" + fmt(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" + std::to_string(static_cast<int>(d)) +
         "</text>\n";
  }
  std::vector<double> ticks;
  for (const auto& c : curves)
    for (const auto& p : c.points) ticks.push_back(p.first);
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (double x : ticks) {
    s += "<text x=\"" + fmt(px(x)) + "\" y=\"" + fmt(H - B + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(x) + "</text>\n";
  }
  s += "<text x=\"" + fmt((L + W - R) / 2) + "\" y=\"" + fmt(H - 16) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">SNR (dB)</text>\n";
  s += "<text x=\"18\" y=\"" + fmt((T + H - B) / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 18 " + fmt((T + H - B) / 2) + ")\">BER</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const bool theory = i + 1 == curves.size();
    const std::string color = theory ? "black" : detail::kPalette[i % 8];
    std::string pts;
    for (const auto& [x, y] : c.points) {
      if (y <= 0.0) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt(px(x)) + "," + fmt(py(y));
    }
    s += "<polyline class=\"curve\" data-label=\"" + detail::xml_escape(c.label) + "\" points=\"" + pts +
         "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"" +
         (theory ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    for (const auto& [x, y] : c.points) {
      if (y <= 0.0 || theory) continue;
      s += "<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    const double ly = T + 14 + 18 * static_cast<double>(i);
    s += "<line x1=\"" + fmt(W - R + 12) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(W - R + 36) + "\" y2=\"" + fmt(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"" + (theory ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    s += "<text x=\"" + fmt(W - R + 42) + "\" y=\"" + fmt(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
         detail::xml_escape(c.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

/// Writes <out_dir>/<scenario>_ber.svg for every scenario in the records and
/// returns the paths in scenario order of first appearance.
inline std::vector<std::string> emit_plots(const std::vector<MetricRecord>& records, const std::string& out_dir) {
  if (records.empty()) throw std::invalid_argument("emit_plots: no records");
  std::vector<std::string> scenarios;
  std::map<std::string, std::vector<MetricRecord>> by;
  for (const auto& r : records) {
    if (!by.count(r.scenario)) scenarios.push_back(r.scenario);
    by[r.scenario].push_back(r);
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> paths;
  for (const auto& sc : scenarios) {
    const std::string path = (std::filesystem::path(out_dir) / (sc + "_ber.svg")).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os << render_ber_svg(sc, by[sc]);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
    paths.push_back(path);
  }
  return paths;
}

}  // namespace ofdmml::harness
