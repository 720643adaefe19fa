// Command-line front end. Exit codes: 0 ok, 1 runtime failure, 2 bad
// arguments or config, 130 interrupted.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qcompress/descriptors.hpp"
#include "qcompress/experiment.hpp"

namespace {

namespace fs = std::filesystem;
using namespace qcompress;

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

Circuit descriptor_circuit(const std::string& family, int qubits, int layers) {
  if (family == "idle") return Circuit(qubits, 0, {});
  const auto f = parse_family(family);
  if (!f) throw CLI::ValidationError("--family", "unknown family '" + family + "'");
  return build({*f, qubits, layers});
}

int cmd_run(const std::string& config_path, const std::string& output_override) {
  ExperimentConfig config;
  try {
    config = load_experiment_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return 2;
  }
  if (!output_override.empty()) config.output = output_override;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    const auto results = run_grid(config, &std::cout, [] { return g_stop != 0; });
    std::cout << results.size() << " cells written to " << resolve_output(config.output).string()
              << '\n';
  } catch (const Interrupted&) {
    std::cerr << "interrupted; completed cells and epochs are kept on disk\n";
    return 130;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\ncompleted cells are kept on disk\n";
    return 1;
  }
  return 0;
}

int cmd_descriptors(const std::string& family, int qubits, int layers, DescriptorConfig cfg,
                    const std::string& out) {
  const auto circuit = descriptor_circuit(family, qubits, layers);
  const auto report = describe(circuit, cfg, family, layers);
  const auto json = to_json(report);
  std::cout << json.dump(1) << '\n';
  if (!out.empty()) {
    const fs::path dir = resolve_output(out);
    fs::create_directories(dir);
    const std::string stem = family + "_n" + std::to_string(qubits) + "_L" + std::to_string(layers);
    std::ofstream(dir / (stem + ".json")) << json.dump(1) << '\n';
    std::ofstream hist(dir / (stem + "_histogram.csv"));
    write_histogram_csv(hist, report.histogram);
  }
  return 0;
}

int cmd_timing(const std::string& dir, const std::string& out) {
  const auto rows = timing_summary(find_run_dirs(dir));
  if (rows.empty()) {
    std::cerr << "no completed cells under " << dir << '\n';
    return 1;
  }
  if (out.empty()) {
    write_timing_summary(std::cout, rows);
  } else {
    std::ofstream f(out);
    write_timing_summary(f, rows);
  }
  return 0;
}

int cmd_report(const std::string& dir) {
  std::string plotter;
  if (const char* env = std::getenv("QCOMPRESS_PLOTTER"); env && *env) {
    plotter = env;
  } else if (std::system("command -v qcompress-plots >/dev/null 2>&1") == 0) {
    plotter = "qcompress-plots";
  }
  if (plotter.empty()) {
    std::cout << "plotter not found (set QCOMPRESS_PLOTTER or put qcompress-plots on PATH); "
                 "artifacts in "
              << dir << " are ready for it\n";
    return 0;
  }
  const std::string cmd = plotter + " \"" + dir + "\"";
  const int rc = std::system(cmd.c_str());
  return rc == 0 ? 0 : 1;
}

int cmd_dataset(const std::string& name, const std::string& out) {
  const auto kind = parse_dataset(name);
  if (!kind) throw CLI::ValidationError("--name", "unknown dataset '" + name + "'");
  const auto json = dataset_to_json(name, dataset_images(*kind));
  if (out.empty()) {
    std::cout << json.dump(1) << '\n';
  } else {
    std::ofstream(out) << json.dump(1) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum autoencoder compression experiments"};
  app.require_subcommand(1);

  std::string config_path, output_override;
  auto* run = app.add_subcommand("run", "Train every cell of an experiment grid");
  run->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output_override, "Override the output directory");

  std::string family;
  int qubits = 4, layers = 3;
  DescriptorConfig dcfg;
  std::string desc_out;
  auto* desc = app.add_subcommand("descriptors", "Expressibility and entangling capability");
  desc->add_option("--family", family, "circuit1 | circuit2 | circuit3 | circuit1-dev3q | idle")
      ->required();
  desc->add_option("--qubits", qubits)->check(CLI::Range(1, kMaxQubits));
  desc->add_option("--layers", layers)->check(CLI::PositiveNumber);
  desc->add_option("--samples", dcfg.num_samples);
  desc->add_option("--bins", dcfg.num_bins);
  desc->add_option("--ent-samples", dcfg.entanglement_samples);
  desc->add_option("--seed", dcfg.seed);
  desc->add_option("--out", desc_out, "Directory for JSON and histogram CSV");

  std::string timing_dir, timing_out;
  auto* timing = app.add_subcommand("timing", "Summarise per-epoch and per-job wall clock");
  timing->add_option("--dir", timing_dir)->required()->check(CLI::ExistingDirectory);
  timing->add_option("--out", timing_out, "CSV path (stdout when omitted)");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Render figures with the external plotter");
  report->add_option("--dir", report_dir)->required()->check(CLI::ExistingDirectory);

  std::string ds_name, ds_out;
  auto* dataset = app.add_subcommand("dataset", "Dump an encoded dataset as JSON");
  dataset->add_option("--name", ds_name, "framed4x4 | bars2x4")->required();
  dataset->add_option("--out", ds_out);

  try {
    app.parse(argc, argv);
    if (*run) return cmd_run(config_path, output_override);
    if (*desc) return cmd_descriptors(family, qubits, layers, dcfg, desc_out);
    if (*timing) return cmd_timing(timing_dir, timing_out);
    if (*report) return cmd_report(report_dir);
    if (*dataset) return cmd_dataset(ds_name, ds_out);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
