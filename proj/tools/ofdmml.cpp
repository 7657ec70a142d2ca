#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ofdmml/ofdmml.hpp"

namespace fs = std::filesystem;
using namespace ofdmml;
using namespace ofdmml::harness;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> elm_trials;
  std::string out;
  std::string detectors;
  std::string dnn_checkpoint;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> dataset;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_trials) {
  cmd->add_option("-c,--config", a.config, "JSON experiment configuration (defaults when omitted)");
  cmd->add_option("-s,--seed", a.seed, "Override the configured seed");
  cmd->add_option("-o,--out", a.out, "Output directory (overrides config and OFDMML_OUTPUT_DIR)");
  if (with_trials) {
    cmd->add_option("-t,--trials", a.trials, "Override the trial count for perfect/LS/MMSE/DNN");
    cmd->add_option("--elm-trials", a.elm_trials, "Override the ELM trial count");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ExperimentConfig resolve(const CommonArgs& a) {
  ExperimentConfig c = a.config.empty() ? default_config() : load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.trials) c.trials = *a.trials;
  if (a.elm_trials) c.elm_trials = *a.elm_trials;
  if (!a.out.empty()) c.output_dir = a.out;
  if (!a.detectors.empty()) c.detectors = split_list(a.detectors);
  if (!a.dnn_checkpoint.empty()) c.dnn.checkpoint = a.dnn_checkpoint;
  if (a.epochs) c.dnn.train.epochs = *a.epochs;
  if (a.dataset) c.dnn.train.dataset_size = *a.dataset;
  c.validate();
  return c;
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

std::string out_path(const ExperimentConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return (fs::path(c.output_dir) / name).string();
}

int cmd_train(const CommonArgs& a) {
  const ExperimentConfig c = resolve(a);
  const std::string loss_path = out_path(c, c.scenario + "_dnn_loss.csv");
  std::ofstream loss(loss_path);
  loss << "epoch,group,loss\n";
  DnnTrainingLog log;
  const DnnDetector d = train_dnn(c, &log, [&](std::size_t epoch, std::size_t group, double l) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.10g\n", epoch, group, l);
    loss << buf;
    loss.flush();
    if (group == 0) std::fprintf(stderr, "epoch %zu loss %.6f\n", epoch, l);
  });
  const std::string ckpt = out_path(c, c.scenario + "_dnn.json");
  nn::write_json_file(ckpt, d.to_json());
  std::cout << "checkpoint " << ckpt << "\nloss curve " << loss_path << '\n';
  return 0;
}

int cmd_run(const CommonArgs& a, bool plot) {
  const ExperimentConfig c = resolve(a);
  MetricsWriter writer(out_path(c, "metrics.csv"));
  CampaignOptions opt;
  opt.writer = &writer;
  opt.log = log_line;
  const auto rows = run_campaign(c, opt);
  std::cout << "appended " << rows.size() << " rows to " << writer.path() << " (run " << run_id(c) << ")\n";
  if (plot) {
    for (const auto& p : emit_plots(read_metrics_file(writer.path()), c.output_dir)) std::cout << "plot " << p << '\n';
  }
  return 0;
}

int cmd_flops(const CommonArgs& a) {
  const ExperimentConfig c = resolve(a);
  const FlopScenario sc = FlopScenario::from_config(c);
  std::ostringstream csv;
  csv << "detector";
  for (auto name : kOpNames) csv << ',' << name;
  csv << ",real_flops\n";
  for (const auto& d : c.detectors) {
    const FlopCounter fc = count_flops(d, sc);
    csv << d;
    for (std::size_t i = 0; i < kOpClasses; ++i) csv << ',' << fc.get(static_cast<Op>(i));
    csv << ',' << fc.real_flops() << '\n';
  }
  std::cout << csv.str();
  std::ofstream(out_path(c, "flops.csv")) << csv.str();
  std::cout << "\ndoubling checks (tolerance 20%)\n";
  bool ok = true;
  for (const auto& chk : doubling_checks()) {
    std::printf("%-5s %s %zu -> %zu: ratio %.3f (expected %.1f) %s\n", chk.detector.c_str(), chk.parameter.c_str(),
                chk.from, chk.to, chk.measured, chk.expected, chk.within(0.2) ? "ok" : "OUT OF RANGE");
    ok = ok && chk.within(0.2);
  }
  return ok ? 0 : 1;
}

int cmd_time(const CommonArgs& a, std::size_t reps) {
  ExperimentConfig c = resolve(a);
  std::optional<DnnDetector> dnn;
  if (c.wants("dnn") && !c.dnn.checkpoint.empty()) dnn = obtain_dnn(c);
  std::vector<std::string> which;
  for (const auto& d : c.detectors) {
    which.push_back(d);
    if (d == "elm") which.push_back("elm_train");
  }
  std::ostringstream csv;
  csv << "detector,median_ms,iqr_ms,repetitions\n";
  for (const auto& d : which) {
    const TimingStats t = time_inference(d, c, reps, dnn ? &*dnn : nullptr);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%zu\n", d.c_str(), t.median_ms, t.iqr_ms, reps);
    csv << buf;
  }
  std::cout << csv.str();
  std::ofstream(out_path(c, "timing.csv")) << csv.str();
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& out) {
  for (const auto& p : emit_plots(read_metrics_file(csv), out)) std::cout << "plot " << p << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OFDM link-level simulator with classical and learned detectors"};
  app.require_subcommand(1);

  CommonArgs train_args, run_args, flops_args, time_args;

  auto* train = app.add_subcommand("train", "Train the DNN detector and write its checkpoint");
  add_common(train, train_args, false);
  train->add_option("--epochs", train_args.epochs, "Override dnn.epochs");
  train->add_option("--dataset", train_args.dataset, "Override dnn.dataset_size");

  bool plot_after = false;
  auto* run = app.add_subcommand("run", "Run a BER/NMSE campaign and append to metrics.csv");
  add_common(run, run_args, true);
  run->add_option("-d,--detectors", run_args.detectors, "Comma-separated detector list (perfect,ls,mmse,dnn,elm)");
  run->add_option("--dnn-checkpoint", run_args.dnn_checkpoint, "Use this DNN checkpoint instead of training");
  run->add_option("--epochs", run_args.epochs, "Override dnn.epochs when training");
  run->add_option("--dataset", run_args.dataset, "Override dnn.dataset_size when training");
  run->add_flag("--plot", plot_after, "Render plots from metrics.csv afterwards");

  auto* flops = app.add_subcommand("flops", "Per-frame operation counts and doubling checks");
  add_common(flops, flops_args, false);
  flops->add_option("-d,--detectors", flops_args.detectors, "Comma-separated detector list");

  std::size_t reps = 200;
  auto* time = app.add_subcommand("time", "Median and IQR of per-frame detection time");
  add_common(time, time_args, false);
  time->add_option("-d,--detectors", time_args.detectors, "Comma-separated detector list");
  time->add_option("--dnn-checkpoint", time_args.dnn_checkpoint, "Time this DNN checkpoint");
  time->add_option("-r,--repetitions", reps, "Timed repetitions per detector")->check(CLI::PositiveNumber);

  std::string plot_csv, plot_out = "plots";
  auto* plot = app.add_subcommand("plot", "Render BER-vs-SNR SVG plots from a metrics CSV");
  plot->add_option("csv", plot_csv, "Metrics CSV")->required();
  plot->add_option("-o,--out", plot_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_args);
    if (*run) return cmd_run(run_args, plot_after);
    if (*flops) return cmd_flops(flops_args);
    if (*time) return cmd_time(time_args, reps);
    if (*plot) return cmd_plot(plot_csv, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
