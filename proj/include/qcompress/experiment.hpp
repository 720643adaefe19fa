#pragma once

// Configuration-driven experiment grids.
//
// Config grammar (INI style):
//
//   file    := { line }
//   line    := blank | comment | section | entry
//   comment := ('#' | ';') text
//   section := '[' name ']'            name in {experiment, grid, optimizer, data, eval}
//   entry   := key '=' value           value lists are comma separated
//
//   [experiment] dataset = framed4x4 | bars2x4   (selects every other default)
//                seed = <uint>  init_seed = <uint>  output = <dir>
//   [grid]       families = circuit1, circuit2, ...  layers = 3, 5, 7
//                compressions = 4->3, 4->2, 4->1
//   [optimizer]  learning_rate, epochs, n_iter, batch_size
//   [data]       train_count, replication, train_indices = i, j, ...
//   [eval]       mode = exact | shots   shots = <int>   seed = <uint>
//
// Every cell writes manifest.json, loss.csv, fidelity.csv, density.json and
// timing.csv into <output>/<family>_L<layers>_<in>to<out>/.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qcompress/ansatz.hpp"
#include "qcompress/artifacts.hpp"
#include "qcompress/datasets.hpp"
#include "qcompress/format.hpp"
#include "qcompress/trainer.hpp"

namespace qcompress {

namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string field, const std::string& message)
      : std::runtime_error(describe(line, field, message)), line_(line), field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string describe(int line, const std::string& field, const std::string& message) {
    std::string out = "config";
    if (line > 0) out += " line " + std::to_string(line);
    if (!field.empty()) out += " [" + field + "]";
    return out + ": " + message;
  }

  int line_;
  std::string field_;
};

enum class DatasetKind { Framed4x4, Bars2x4 };

inline std::string_view dataset_name(DatasetKind k) {
  return k == DatasetKind::Framed4x4 ? "framed4x4" : "bars2x4";
}

inline std::optional<DatasetKind> parse_dataset(std::string_view s) {
  if (s == "framed4x4") return DatasetKind::Framed4x4;
  if (s == "bars2x4") return DatasetKind::Bars2x4;
  return std::nullopt;
}

inline std::vector<PixelImage> dataset_images(DatasetKind k) {
  return k == DatasetKind::Framed4x4 ? framed_4x4_dataset() : bars_and_stripes_2x4();
}

inline int dataset_qubits(DatasetKind k) { return k == DatasetKind::Framed4x4 ? 4 : 3; }

struct Compression {
  int n_input = 4;
  int n_latent = 3;
  bool operator==(const Compression&) const = default;
};

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::Framed4x4;
  std::vector<AnsatzFamily> families;
  std::vector<int> layers;
  std::vector<Compression> compressions;
  double learning_rate = 0.05;
  int epochs = 40;
  int n_iter = 10;
  int batch_size = 7;
  int train_count = 14;
  int replication = 3;
  std::optional<std::vector<int>> train_indices;
  EvalSettings eval;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> init_seed;
  fs::path output = "runs";

  static ExperimentConfig defaults(DatasetKind kind) {
    ExperimentConfig c;
    c.dataset = kind;
    if (kind == DatasetKind::Framed4x4) {
      c.families = {AnsatzFamily::Circuit1, AnsatzFamily::Circuit2, AnsatzFamily::Circuit3};
      c.layers = {3, 5, 7};
      c.compressions = {{4, 3}, {4, 2}, {4, 1}};
    } else {
      c.families = {AnsatzFamily::Circuit1Device3q};
      c.layers = {3};
      c.compressions = {{3, 2}};
      c.n_iter = 1;
      c.batch_size = 5;
      c.train_count = 10;
      c.replication = 2;
    }
    c.eval.seed = c.seed;
    return c;
  }

  SplitOptions split_options() const {
    SplitOptions o;
    o.train_count = train_count;
    o.replication = replication;
    o.batch_size = batch_size;
    o.seed = seed;
    o.train_indices = train_indices;
    return o;
  }
};

struct GridCell {
  AnsatzFamily family;
  int layers;
  Compression compression;

  std::string name() const {
    return std::string(family_name(family)) + "_L" + std::to_string(layers) + "_" +
           std::to_string(compression.n_input) + "to" + std::to_string(compression.n_latent);
  }
};

inline std::vector<GridCell> grid_cells(const ExperimentConfig& c) {
  std::vector<GridCell> out;
  for (auto f : c.families) {
    for (int l : c.layers) {
      for (const auto& comp : c.compressions) out.push_back({f, l, comp});
    }
  }
  return out;
}

inline CompressionConfig cell_config(const ExperimentConfig& c, const GridCell& cell) {
  CompressionConfig cc;
  cc.ansatz = {cell.family, cell.compression.n_input, cell.layers};
  cc.n_input = cell.compression.n_input;
  cc.n_latent = cell.compression.n_latent;
  cc.learning_rate = c.learning_rate;
  cc.epochs = c.epochs;
  cc.n_iter = c.n_iter;
  cc.batch_size = c.batch_size;
  cc.eval = c.eval;
  cc.init_seed = c.init_seed.value_or(c.seed);
  return cc;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

template <typename T>
T parse_number(const ConfigEntry& e, std::string_view text) {
  T v{};
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(e.line, e.section + "." + e.key,
                      "expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

inline std::vector<std::string_view> list_items(const ConfigEntry& e) {
  std::vector<std::string_view> out;
  for (auto item : split(e.value, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(e.line, e.section + "." + e.key, "empty list item");
    out.push_back(item);
  }
  return out;
}

inline std::vector<ConfigEntry> read_entries(std::string_view text) {
  static const std::vector<std::string> kSections = {"experiment", "grid", "optimizer", "data",
                                                     "eval"};
  std::vector<ConfigEntry> out;
  std::string section;
  int line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
        throw ConfigError(line_no, section, "unknown section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    if (section.empty()) throw ConfigError(line_no, "", "entry outside of a section");
    ConfigEntry e{section, std::string(trim(line.substr(0, eq))),
                  std::string(trim(line.substr(eq + 1))), line_no};
    if (e.key.empty()) throw ConfigError(line_no, section, "missing key");
    if (e.value.empty()) throw ConfigError(line_no, section + "." + e.key, "missing value");
    for (const auto& prev : out) {
      if (prev.section == e.section && prev.key == e.key) {
        throw ConfigError(line_no, section + "." + e.key,
                          "duplicate key (first set on line " + std::to_string(prev.line) + ")");
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline void apply_entry(ExperimentConfig& c, const ConfigEntry& e) {
  const std::string field = e.section + "." + e.key;
  const auto fail = [&](const std::string& msg) { return ConfigError(e.line, field, msg); };

  if (field == "experiment.dataset") return;  // consumed first
  if (field == "experiment.seed") {
    c.seed = parse_number<std::uint64_t>(e, e.value);
  } else if (field == "experiment.init_seed") {
    c.init_seed = parse_number<std::uint64_t>(e, e.value);
  } else if (field == "experiment.output") {
    c.output = e.value;
  } else if (field == "grid.families") {
    c.families.clear();
    for (auto item : list_items(e)) {
      const auto f = parse_family(item);
      if (!f) throw fail("unknown family '" + std::string(item) + "'");
      c.families.push_back(*f);
    }
  } else if (field == "grid.layers") {
    c.layers.clear();
    for (auto item : list_items(e)) {
      const int l = parse_number<int>(e, item);
      if (l < 1) throw fail("layers must be >= 1");
      c.layers.push_back(l);
    }
  } else if (field == "grid.compressions") {
    c.compressions.clear();
    for (auto item : list_items(e)) {
      const auto arrow = item.find("->");
      if (arrow == std::string_view::npos) throw fail("expected 'n->m', got '" + std::string(item) + "'");
      Compression comp{parse_number<int>(e, item.substr(0, arrow)),
                       parse_number<int>(e, item.substr(arrow + 2))};
      if (comp.n_latent < 1 || comp.n_latent >= comp.n_input) {
        throw fail("compression target must be smaller than the input");
      }
      c.compressions.push_back(comp);
    }
  } else if (field == "optimizer.learning_rate") {
    c.learning_rate = parse_number<double>(e, e.value);
    if (!(c.learning_rate > 0.0)) throw fail("learning rate must be positive");
  } else if (field == "optimizer.epochs") {
    c.epochs = parse_number<int>(e, e.value);
    if (c.epochs < 0) throw fail("epochs must be >= 0");
  } else if (field == "optimizer.n_iter") {
    c.n_iter = parse_number<int>(e, e.value);
    if (c.n_iter < 1) throw fail("n_iter must be >= 1");
  } else if (field == "optimizer.batch_size") {
    c.batch_size = parse_number<int>(e, e.value);
    if (c.batch_size < 1) throw fail("batch size must be >= 1");
  } else if (field == "data.train_count") {
    c.train_count = parse_number<int>(e, e.value);
  } else if (field == "data.replication") {
    c.replication = parse_number<int>(e, e.value);
    if (c.replication < 1) throw fail("replication must be >= 1");
  } else if (field == "data.train_indices") {
    std::vector<int> idx;
    for (auto item : list_items(e)) idx.push_back(parse_number<int>(e, item));
    c.train_indices = idx;
  } else if (field == "eval.mode") {
    if (e.value == "exact") {
      c.eval.mode = EvalMode::ExactExpectation;
    } else if (e.value == "shots") {
      c.eval.mode = EvalMode::Shots;
    } else {
      throw fail("mode must be 'exact' or 'shots'");
    }
  } else if (field == "eval.shots") {
    c.eval.shots = parse_number<long>(e, e.value);
    if (c.eval.shots < 1) throw fail("shots must be >= 1");
  } else if (field == "eval.seed") {
    c.eval.seed = parse_number<std::uint64_t>(e, e.value);
  } else {
    throw fail("unknown key");
  }
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::string_view text) {
  const auto entries = detail::read_entries(text);
  DatasetKind kind = DatasetKind::Framed4x4;
  int dataset_line = 0;
  for (const auto& e : entries) {
    if (e.section == "experiment" && e.key == "dataset") {
      const auto k = parse_dataset(e.value);
      if (!k) throw ConfigError(e.line, "experiment.dataset", "unknown dataset '" + e.value + "'");
      kind = *k;
      dataset_line = e.line;
    }
  }
  auto c = ExperimentConfig::defaults(kind);
  bool eval_seed_set = false;
  for (const auto& e : entries) {
    detail::apply_entry(c, e);
    eval_seed_set = eval_seed_set || (e.section == "eval" && e.key == "seed");
  }
  if (!eval_seed_set) c.eval.seed = c.seed;

  const int qubits = dataset_qubits(kind);
  for (const auto& comp : c.compressions) {
    if (comp.n_input != qubits) {
      throw ConfigError(dataset_line, "grid.compressions",
                        std::string(dataset_name(kind)) + " images encode on " +
                            std::to_string(qubits) + " qubits");
    }
  }
  for (auto f : c.families) {
    if (f == AnsatzFamily::Circuit1Device3q && qubits != 3) {
      throw ConfigError(0, "grid.families", "circuit1-dev3q needs the 3-qubit dataset");
    }
  }
  if (c.families.empty() || c.layers.empty() || c.compressions.empty()) {
    throw ConfigError(0, "grid", "grid is empty");
  }
  const int total = static_cast<int>(dataset_images(kind).size());
  const int selected = c.train_indices ? static_cast<int>(c.train_indices->size()) : c.train_count;
  if (selected < 1 || selected > total) {
    throw ConfigError(0, "data.train_count", "must be in [1, " + std::to_string(total) + "]");
  }
  if ((selected * c.replication) % c.batch_size != 0) {
    throw ConfigError(0, "optimizer.batch_size",
                      "batch size must divide the augmented training size " +
                          std::to_string(selected * c.replication));
  }
  if (c.train_indices) {
    for (int i : *c.train_indices) {
      if (i < 0 || i >= total) throw ConfigError(0, "data.train_indices", "index out of range");
    }
  }
  return c;
}

inline ExperimentConfig load_experiment_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(0, "", "cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

/// Relative output directories resolve against $QCOMPRESS_OUTPUT_ROOT when set.
inline fs::path resolve_output(const fs::path& output) {
  if (output.is_absolute()) return output;
  if (const char* root = std::getenv("QCOMPRESS_OUTPUT_ROOT"); root && *root) {
    return fs::path(root) / output;
  }
  return output;
}

struct CellResult {
  GridCell cell;
  TrainRun run;
  std::vector<ImageFidelity> fidelities;
  fs::path dir;
};

class Interrupted : public std::runtime_error {
 public:
  Interrupted() : std::runtime_error("interrupted") {}
};

/// Median of an unsorted sample.
inline double median(std::vector<double> v) {
  if (v.empty()) throw std::domain_error("median of empty sample");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace detail

/// Trains one cell and writes its artifacts. loss.csv grows epoch by epoch
/// so an interrupted cell keeps its completed epochs.
inline CellResult run_cell(const ExperimentConfig& config, const GridCell& cell,
                           const DatasetSplit& split, const fs::path& dir,
                           const std::function<bool()>& should_stop = {}) {
  fs::create_directories(dir);
  const auto cc = cell_config(config, cell);

  std::ofstream loss(dir / "loss.csv", std::ios::binary | std::ios::trunc);
  loss << kLossCsvHeader << '\n' << std::flush;
  auto run = train(split, cc, [&](const EpochRecord& r) {
    write_loss_row(loss, r);
    loss.flush();
    if (should_stop && should_stop()) throw Interrupted();
  });
  run.manifest.dataset = std::string(dataset_name(config.dataset));
  loss.close();

  CellResult result{cell, std::move(run), {}, dir};
  result.fidelities = evaluate(result.run, split.test);

  std::ostringstream fid;
  write_fidelity_csv(fid, result.fidelities);
  detail::write_file(dir / "fidelity.csv", fid.str());

  nlohmann::json density;
  if (!result.fidelities.empty()) {
    const auto& show = result.fidelities.front();
    density = {{"image_id", show.image_id},
               {"fidelity", show.fidelity},
               {"original", to_json(pure_density(split.test.front().state))},
               {"latent", to_json(show.latent)},
               {"decompressed", to_json(show.decompressed)}};
  }
  detail::write_file(dir / "density.json", density.dump(1) + "\n");

  std::ostringstream timing;
  write_timing_csv(timing, result.run);
  detail::write_file(dir / "timing.csv", timing.str());

  auto manifest = manifest_to_json(result.run);
  manifest["cell"] = cell.name();
  std::vector<double> f;
  for (const auto& r : result.fidelities) f.push_back(r.fidelity);
  std::sort(f.begin(), f.end());
  if (!f.empty()) {
    manifest["fidelity"] = {{"min", f.front()}, {"max", f.back()}, {"median", median(f)}};
  }
  detail::write_file(dir / "manifest.json", manifest.dump(1) + "\n");
  return result;
}

/// Runs every cell in order. Cells that finished stay on disk if a later
/// cell throws.
inline std::vector<CellResult> run_grid(const ExperimentConfig& config, std::ostream* log = nullptr,
                                        const std::function<bool()>& should_stop = {}) {
  const auto root = resolve_output(config.output);
  const auto split = make_split(dataset_images(config.dataset), config.split_options());
  std::vector<CellResult> results;
  for (const auto& cell : grid_cells(config)) {
    if (log) *log << "cell " << cell.name() << " ... " << std::flush;
    results.push_back(run_cell(config, cell, split, root / cell.name(), should_stop));
    if (log) {
      const auto& r = results.back();
      *log << "final loss " << format_double(r.run.records.empty() ? 0.0 : r.run.records.back().mean_loss)
           << '\n';
    }
  }
  return results;
}

struct TimingRow {
  std::string family;
  int layers = 0;
  int runs = 0;
  double mean_epoch_seconds = 0.0;
  double mean_job_seconds = 0.0;
  std::uint64_t jobs_per_epoch = 0;           // observed
  std::uint64_t expected_jobs_per_epoch = 0;  // recomputed from the config
  double relative_to_fastest = 1.0;           // among families at the same L
};

inline constexpr std::string_view kTimingSummaryHeader =
    "family,layers,runs,mean_epoch_seconds,mean_job_seconds,jobs_per_epoch,"
    "expected_jobs_per_epoch,relative_to_fastest";

/// Aggregates cell manifests per (family, layers).
inline std::vector<TimingRow> timing_summary(const std::vector<fs::path>& run_dirs) {
  struct Acc {
    int runs = 0;
    double epoch_seconds = 0.0;
    double job_seconds = 0.0;
    std::uint64_t jobs = 0;
    std::uint64_t expected = 0;
  };
  std::map<std::pair<std::string, int>, Acc> acc;
  for (const auto& dir : run_dirs) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("missing manifest.json in " + dir.string());
    const auto m = nlohmann::json::parse(in);
    const auto& cfg = m.at("config");
    const auto family = cfg.at("family").get<std::string>();
    const int layers = cfg.at("layers").get<int>();
    const auto fam = parse_family(family);
    if (!fam) throw std::runtime_error("unknown family in " + dir.string());
    const int params = build({*fam, cfg.at("qubits").get<int>(), layers}).num_params();
    const auto expected = jobs_per_epoch(params, m.at("train_size").get<std::size_t>(),
                                         cfg.at("n_iter").get<int>());
    const auto& epochs = m.at("epochs");
    if (epochs.empty()) continue;
    double seconds = 0.0;
    std::uint64_t jobs = 0;
    for (const auto& e : epochs) {
      seconds += e.at("seconds").get<double>();
      jobs += e.at("jobs").get<std::uint64_t>();
    }
    auto& a = acc[{family, layers}];
    ++a.runs;
    a.epoch_seconds += seconds / static_cast<double>(epochs.size());
    a.job_seconds += jobs ? seconds / static_cast<double>(jobs) : 0.0;
    a.jobs += jobs / epochs.size();
    a.expected += expected;
  }

  std::vector<TimingRow> rows;
  for (const auto& [key, a] : acc) {
    TimingRow r;
    r.family = key.first;
    r.layers = key.second;
    r.runs = a.runs;
    r.mean_epoch_seconds = a.epoch_seconds / a.runs;
    r.mean_job_seconds = a.job_seconds / a.runs;
    r.jobs_per_epoch = a.jobs / static_cast<std::uint64_t>(a.runs);
    r.expected_jobs_per_epoch = a.expected / static_cast<std::uint64_t>(a.runs);
    rows.push_back(r);
  }
  for (auto& r : rows) {
    double fastest = r.mean_epoch_seconds;
    for (const auto& o : rows) {
      if (o.layers == r.layers) fastest = std::min(fastest, o.mean_epoch_seconds);
    }
    r.relative_to_fastest = fastest > 0.0 ? r.mean_epoch_seconds / fastest : 1.0;
  }
  return rows;
}

inline void write_timing_summary(std::ostream& os, const std::vector<TimingRow>& rows) {
  os << kTimingSummaryHeader << '\n';
  for (const auto& r : rows) {
    os << r.family << ',' << r.layers << ',' << r.runs << ',' << format_double(r.mean_epoch_seconds)
       << ',' << format_double(r.mean_job_seconds) << ',' << r.jobs_per_epoch << ','
       << r.expected_jobs_per_epoch << ',' << format_double(r.relative_to_fastest) << '\n';
  }
}

/// Cell directories (those holding a manifest.json) directly under `root`,
/// or `root` itself when it is a cell.
inline std::vector<fs::path> find_run_dirs(const fs::path& root) {
  std::vector<fs::path> out;
  if (fs::exists(root / "manifest.json")) return {root};
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace qcompress
