// Acceptance suite: prints one "criterion N PASS|FAIL: ..." line per
// criterion and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ofdmml/ofdmml.hpp"

namespace fs = std::filesystem;
using namespace ofdmml;
using namespace ofdmml::harness;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void note(const std::string& s) {
  std::fprintf(stderr, "  %s\n", s.c_str());
  std::fflush(stderr);
}

const MetricRecord& row(const std::vector<MetricRecord>& rows, const std::string& detector, double snr_db) {
  for (const auto& r : rows) {
    if (r.detector == detector && r.snr_db == snr_db) return r;
  }
  throw std::runtime_error("missing row " + detector + " at " + fmt("%g", snr_db) + " dB");
}

std::string ber_pair(const MetricRecord& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s %.3e+-%.1e", r.detector.c_str(), r.ber(), r.ber_ci95());
  return buf;
}

// ---------------------------------------------------------------- 1 and 2

std::vector<MetricRecord> classical_rows;

const std::vector<MetricRecord>& classical_campaign(const fs::path& out) {
  if (classical_rows.empty()) {
    ExperimentConfig c;
    c.scenario = "acceptance_classical";
    c.detectors = {"perfect", "ls", "mmse"};
    c.trials = 10000;
    fs::remove(out / "classical.csv");
    MetricsWriter w((out / "classical.csv").string());
    CampaignOptions opt;
    opt.writer = &w;
    classical_rows = run_campaign(c, opt);
  }
  return classical_rows;
}

Result criterion1(const fs::path& out) {
  Result res;
  std::string d;
  for (const auto& r : classical_campaign(out)) {
    if (r.detector != "perfect") continue;
    const double theory = theoretical_ber_db(r.snr_db, 4);
    const double sigma = std::sqrt(theory * (1.0 - theory) / static_cast<double>(r.bits));
    const double z = (r.ber() - theory) / sigma;
    res.pass = res.pass && std::abs(z) <= 3.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s%g dB z=%+.2f", d.empty() ? "" : ", ", r.snr_db, z);
    d += buf;
    note(fmt("%g dB: ", r.snr_db) + fmt("measured %.5e", r.ber()) + fmt(" theory %.5e", theory) +
         fmt(" sigma %.2e", sigma));
  }
  res.detail = "perfect-CSI BER vs theory over 1e4 frames, " + d + " (limit |z| <= 3)";
  return res;
}

Result criterion2(const fs::path& out) {
  const auto& rows = classical_campaign(out);
  bool below = true;
  for (const auto& r : rows) {
    if (r.detector != "ls") continue;
    const auto& m = row(rows, "mmse", r.snr_db);
    note(fmt("%g dB: ", r.snr_db) + fmt("NMSE ls %.3e", *r.nmse) + fmt(" mmse %.3e", *m.nmse));
    below = below && *m.nmse < *r.nmse;
  }
  const double ls20 = *row(rows, "ls", 20.0).nmse;
  const double mmse20 = *row(rows, "mmse", 20.0).nmse;
  const double target = 52e-4;
  const bool anchor = ls20 >= target / 3.0 && ls20 <= target * 3.0;
  const bool gain = ls20 / mmse20 >= 3.0;
  Result res;
  res.pass = below && anchor && gain;
  res.detail = "NMSE_LS(20 dB) = " + fmt("%.3e", ls20) + " (window 1.73e-3..1.56e-2), LS/MMSE ratio at 20 dB = " +
               fmt("%.2f", ls20 / mmse20) + " (need >= 3), MMSE below LS at every SNR: " +
               (below ? "yes" : "no");
  return res;
}

// ---------------------------------------------------------------- 3

Result criterion3() {
  RngStream rng(3, 1);
  auto m = nn::Mlp<double>::relu_sigmoid(4, {5}, 3);
  m.initialize(rng);
  for (auto& l : m.layers())
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.2 * rng.normal();
  nn::Mat<double> x(4, 10);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  nn::Mat<double> y(3, 10);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = static_cast<double>(rng.bit());

  const nn::Gradients<double> g = m.backward(x, y);
  std::vector<double> flat;
  for (std::size_t i = 0; i < m.layers().size(); ++i) {
    for (Eigen::Index r = 0; r < g.weights[i].rows(); ++r)
      for (Eigen::Index c = 0; c < g.weights[i].cols(); ++c) flat.push_back(g.weights[i](r, c));
    for (Eigen::Index r = 0; r < g.bias[i].size(); ++r) flat.push_back(g.bias[i](r));
  }
  const double h = 1e-6;
  double worst = 0.0;
  const std::size_t n = m.parameter_count();
  for (std::size_t p = 0; p < n; ++p) {
    double& theta = m.parameter(p);
    const double saved = theta;
    theta = saved + h;
    const double up = nn::mse_loss(m.forward(x), y);
    theta = saved - h;
    const double down = nn::mse_loss(m.forward(x), y);
    theta = saved;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max(std::abs(fd), std::abs(flat[p]));
    worst = std::max(worst, scale == 0.0 ? 0.0 : std::abs(fd - flat[p]) / scale);
  }
  return {worst < 1e-5 && n >= 10, "[4,5,3] net, " + std::to_string(n) +
                                       " parameters x 10 inputs, worst relative error " + fmt("%.2e", worst) +
                                       " (limit 1e-5)"};
}

// ---------------------------------------------------------------- 4

Result criterion4() {
  ExperimentConfig c;
  const LinkSetup s = LinkSetup::from_config(c);
  RngStream rng(c.seed, stream_id(0xacc4));
  const ElmTrial block = simulate_elm_block(s, 100, 1, 15.0, rng);
  ElmBank bank(64, c.elm.elm_config(), c.seed);
  bank.train(block.rx_pilots, block.tx_pilots);
  double worst = 0.0;
  for (std::size_t k = 0; k < 64; ++k) {
    const auto& sub = bank.subnet(k);
    const RMat o = sub.hidden_matrix(to_real_pairs(block.rx_pilots.col(k)));
    const RMat xp = to_real_pairs(block.tx_pilots.col(k));
    const RMat grad = adjoint(o) * (o * sub.output_weights() - xp);
    worst = std::max(worst, frobenius_norm(grad) / (frobenius_norm(o) * frobenius_norm(xp)));
  }
  return {worst < 1e-9, "64 subnets at I=100, L=50, worst residual orthogonality " + fmt("%.2e", worst) +
                            " (limit 1e-9)"};
}

// ---------------------------------------------------------------- 5, 6, 7

DnnDetector train_logged(ExperimentConfig c, const fs::path& out) {
  c.dnn.train.epochs = 200;
  c.dnn.train.dataset_size = 50000;
  const auto t0 = std::chrono::steady_clock::now();
  std::ofstream loss(out / (c.scenario + "_loss.csv"));
  loss << "epoch,group,loss\n";
  const DnnDetector d = train_dnn(c, nullptr, [&](std::size_t epoch, std::size_t group, double l) {
    loss << epoch << ',' << group << ',' << fmt("%.10g", l) << '\n';
    if (group == 0 && (epoch + 1) % 25 == 0) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      note(c.scenario + fmt(": epoch %.0f", static_cast<double>(epoch + 1)) + fmt(" loss %.5f", l) +
           fmt(" (%.0f s)", s));
    }
  });
  nn::write_json_file((out / (c.scenario + "_dnn.json")).string(), d.to_json());
  return d;
}

std::vector<MetricRecord> test_campaign(ExperimentConfig c, const DnnDetector& d, const fs::path& out) {
  c.trials = 2000;
  fs::remove(out / (c.scenario + ".csv"));
  MetricsWriter w((out / (c.scenario + ".csv")).string());
  CampaignOptions opt;
  opt.dnn = &d;
  opt.writer = &w;
  const auto rows = run_campaign(c, opt);
  for (const auto& r : rows) note(fmt("%g dB ", r.snr_db) + ber_pair(r));
  return rows;
}

Result criterion5(const fs::path& out) {
  ExperimentConfig c;
  c.scenario = "acceptance_pilots8";
  c.pilots = 8;
  c.dnn.train.snr_train_db = 20.0;
  c.snr_db = {15.0, 20.0, 25.0};
  c.detectors = {"ls", "dnn"};
  const DnnDetector d = train_logged(c, out);
  const auto rows = test_campaign(c, d, out);
  Result res;
  std::string detail;
  for (double snr : c.snr_db) {
    const auto& dnn = row(rows, "dnn", snr);
    const auto& ls = row(rows, "ls", snr);
    res.pass = res.pass && dnn.ber() < ls.ber();
    detail += fmt("%g dB: ", snr) + fmt("dnn %.3e", dnn.ber()) + fmt(" vs ls %.3e; ", ls.ber());
  }
  res.detail = "8 pilots, trained at 20 dB, 2e3 frames, " + detail + "need dnn < ls";
  return res;
}

Result criterion6(const fs::path& out) {
  ExperimentConfig c;
  c.scenario = "acceptance_no_cp";
  c.cp_fraction = 0.0;
  c.dnn.train.snr_train_db = 20.0;
  c.snr_db = {5.0, 10.0, 15.0};
  c.detectors = {"ls", "mmse", "dnn"};
  const DnnDetector d = train_logged(c, out);
  const auto rows = test_campaign(c, d, out);
  Result res;
  std::string detail;
  for (double snr : c.snr_db) {
    const auto& dnn = row(rows, "dnn", snr);
    const auto& ls = row(rows, "ls", snr);
    const auto& mmse = row(rows, "mmse", snr);
    res.pass = res.pass && dnn.ber() < ls.ber() && dnn.ber() < mmse.ber();
    detail += fmt("%g dB: ", snr) + fmt("dnn %.3e", dnn.ber()) + fmt(" ls %.3e", ls.ber()) +
              fmt(" mmse %.3e; ", mmse.ber());
  }
  res.detail = "no CP, 64 pilots, trained at 20 dB, 2e3 frames, " + detail + "need dnn below both";
  return res;
}

Result criterion7(const fs::path& out) {
  ExperimentConfig base;
  base.snr_db = {5.0, 25.0};
  base.detectors = {"dnn"};
  std::map<int, std::vector<MetricRecord>> by_train;
  for (int train_db : {5, 25}) {
    ExperimentConfig c = base;
    c.scenario = "acceptance_train" + std::to_string(train_db) + "db";
    c.dnn.train.snr_train_db = train_db;
    const DnnDetector d = train_logged(c, out);
    by_train[train_db] = test_campaign(c, d, out);
  }
  auto separated_below = [](const MetricRecord& a, const MetricRecord& b) {
    return a.ber() + a.ber_ci95() < b.ber() - b.ber_ci95();
  };
  const auto& lo5 = row(by_train[5], "dnn", 5.0);
  const auto& hi5 = row(by_train[25], "dnn", 5.0);
  const auto& lo25 = row(by_train[5], "dnn", 25.0);
  const auto& hi25 = row(by_train[25], "dnn", 25.0);
  const bool low = separated_below(lo5, hi5);
  const bool high = separated_below(hi25, lo25);
  char buf[384];
  std::snprintf(buf, sizeof buf,
                "at 5 dB: trained@5 %.3e+-%.1e vs trained@25 %.3e+-%.1e (%s); at 25 dB: trained@25 %.3e+-%.1e vs "
                "trained@5 %.3e+-%.1e (%s)",
                lo5.ber(), lo5.ber_ci95(), hi5.ber(), hi5.ber_ci95(), low ? "separated" : "not separated",
                hi25.ber(), hi25.ber_ci95(), lo25.ber(), lo25.ber_ci95(), high ? "separated" : "not separated");
  return {low && high, buf};
}

// ---------------------------------------------------------------- 8

Result criterion8() {
  const auto profile = ChannelProfile::exponential();
  std::size_t draws = 0;
  std::size_t mismatches = 0;
  std::size_t max_occupancy = 0;
  for (std::size_t users : {4u, 6u, 8u}) {
    const auto map = build_interference_map(users);
    for (auto o : map.occupancy()) max_occupancy = std::max(max_occupancy, o);
    RngStream rng(8, stream_id(0xa110c, users));
    for (int t = 0; t < 1000; ++t, ++draws) {
      std::vector<CVec> h;
      const auto dist = place_users(users, profile, rng);
      for (std::size_t u = 0; u < users; ++u) h.push_back(draw_user_channel(profile, dist[u], 64, rng).response);
      const std::vector<double> power(users, 1.0);
      const double noise = std::pow(500.0, -3.0) * rng.uniform(0.01, 1.0);
      const auto state = select_subcarriers(map, h, power, noise, 4);

      std::size_t primary = 0;
      for (std::size_t u = 0; u < users; ++u) {
        if (map.block[u] != u) continue;
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t k = u * map.per_user; k < (u + 1) * map.per_user; ++k) {
          double interference = 0.0;
          for (std::size_t j = 0; j < users; ++j) {
            if (j != u && map.block[j] == map.block[u]) interference += power[j] * std::norm(h[j][k]);
          }
          all.push_back({power[u] * std::norm(h[u][k]) / (interference + noise), k});
        }
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
          return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        std::set<std::size_t> want;
        for (std::size_t r = 0; r < 4; ++r) want.insert(all[r].second);
        const auto& sel = state.selections.at(primary++);
        const std::set<std::size_t> got(sel.subcarriers.begin(), sel.subcarriers.end());
        if (got != want || sel.user != u) ++mismatches;
      }
      if (primary != state.selections.size()) ++mismatches;
    }
  }
  return {mismatches == 0 && max_occupancy <= 2,
          std::to_string(draws) + " draws over U in {4,6,8}, " + std::to_string(mismatches) +
              " mismatches against the exhaustive top-4 oracle, max occupancy " + std::to_string(max_occupancy)};
}

// ---------------------------------------------------------------- 9

Result criterion9() {
  Result res;
  for (const auto& c : doubling_checks()) {
    res.pass = res.pass && c.within(0.2);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s %s %zu->%zu ratio %.3f (expect %.0f)", res.detail.empty() ? "" : ", ",
                  c.detector.c_str(), c.parameter.c_str(), c.from, c.to, c.measured, c.expected);
    res.detail += buf;
  }
  res.detail += ", tolerance 20%";
  return res;
}

// ---------------------------------------------------------------- 10

Result criterion10(const fs::path& out) {
  ExperimentConfig c;
  c.scenario = "acceptance_repro";
  c.snr_db = {10.0, 20.0};
  c.trials = 100;
  c.elm_trials = 5;
  c.dnn.hidden = {32};
  c.dnn.train.epochs = 2;
  c.dnn.train.dataset_size = 500;
  std::vector<std::string> bytes;
  for (int run = 0; run < 2; ++run) {
    const fs::path p = out / ("repro_run" + std::to_string(run) + ".csv");
    fs::remove(p);
    {
      MetricsWriter w(p.string());
      CampaignOptions opt;
      opt.writer = &w;
      (void)run_campaign(c, opt);
    }
    std::ifstream is(p, std::ios::binary);
    bytes.emplace_back(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  }
  const bool same = bytes[0] == bytes[1] && !bytes[0].empty();
  return {same, "two campaigns with all 5 detectors and identical config and seed: " +
                    std::to_string(bytes[0].size()) + " and " + std::to_string(bytes[1].size()) + " bytes, " +
                    (same ? "byte-identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  std::string out_dir = "acceptance_out";
  app.add_option("--only", only, "Run only these criteria")->delimiter(',')->check(CLI::Range(1, 10));
  app.add_option("-o,--out", out_dir, "Directory for CSVs, loss curves and checkpoints");
  CLI11_PARSE(app, argc, argv);

  const fs::path out(out_dir);
  fs::create_directories(out);
  const std::vector<std::function<Result()>> criteria = {
      [&] { return criterion1(out); }, [&] { return criterion2(out); }, criterion3, criterion4,
      [&] { return criterion5(out); }, [&] { return criterion6(out); }, [&] { return criterion7(out); },
      criterion8, criterion9, [&] { return criterion10(out); }};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = criteria[i]();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s [%.1f s]\n", id, r.pass ? "PASS" : "FAIL", r.detail.c_str(), s);
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
