#pragma once

// On-disk contract with the plotting side: JSON manifests and fixed-header
// CSV files.

#include <algorithm>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qcompress/ansatz.hpp"
#include "qcompress/format.hpp"
#include "qcompress/trainer.hpp"

namespace qcompress {

inline constexpr std::string_view kLossCsvHeader = "epoch,mean_loss,jobs,seconds";
inline constexpr std::string_view kFidelityCsvHeader = "image_id,fidelity";
inline constexpr std::string_view kTimingCsvHeader = "epoch,seconds,jobs,seconds_per_job";

inline std::string_view eval_mode_name(EvalMode m) {
  return m == EvalMode::Shots ? "shots" : "exact";
}

inline void write_loss_row(std::ostream& os, const EpochRecord& r) {
  os << r.epoch << ',' << format_double(r.mean_loss) << ',' << r.jobs_executed << ','
     << format_double(r.wall_clock_seconds) << '\n';
}

inline void write_loss_csv(std::ostream& os, const TrainRun& run) {
  os << kLossCsvHeader << '\n';
  for (const auto& r : run.records) write_loss_row(os, r);
}

inline void write_fidelity_csv(std::ostream& os, std::span<const ImageFidelity> results) {
  os << kFidelityCsvHeader << '\n';
  for (const auto& r : results) os << r.image_id << ',' << format_double(r.fidelity) << '\n';
}

inline void write_timing_csv(std::ostream& os, const TrainRun& run) {
  os << kTimingCsvHeader << '\n';
  for (const auto& r : run.records) {
    const double per_job =
        r.jobs_executed ? r.wall_clock_seconds / static_cast<double>(r.jobs_executed) : 0.0;
    os << r.epoch << ',' << format_double(r.wall_clock_seconds) << ',' << r.jobs_executed << ','
       << format_double(per_job) << '\n';
  }
}

inline nlohmann::json config_to_json(const CompressionConfig& c) {
  return {
      {"family", family_name(c.ansatz.family)},
      {"qubits", c.ansatz.num_qubits},
      {"layers", c.ansatz.layers},
      {"n_input", c.n_input},
      {"n_latent", c.n_latent},
      {"trash", c.trash_qubits().indices()},
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"n_iter", c.n_iter},
      {"batch_size", c.batch_size},
      {"eval_mode", eval_mode_name(c.eval.mode)},
      {"shots", c.eval.shots},
      {"eval_seed", c.eval.seed},
      {"init_seed", c.init_seed},
  };
}

inline nlohmann::json manifest_to_json(const TrainRun& run) {
  const auto params = build(run.config.ansatz).num_params();
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& r : run.records) {
    epochs.push_back({{"epoch", r.epoch},
                      {"mean_loss", r.mean_loss},
                      {"mean_loss_raw", r.mean_loss_raw},
                      {"jobs", r.jobs_executed},
                      {"seconds", r.wall_clock_seconds}});
  }
  return {
      {"config", config_to_json(run.config)},
      {"num_params", params},
      {"dataset", run.manifest.dataset},
      {"split_seed", run.manifest.split_seed},
      {"train_ids", run.manifest.train_ids},
      {"test_ids", run.manifest.test_ids},
      {"train_size", run.manifest.train_size},
      {"expected_jobs_per_epoch",
       jobs_per_epoch(params, run.manifest.train_size, run.config.n_iter)},
      {"initial_theta", run.initial_theta},
      {"best_theta", run.best_theta},
      {"epochs", epochs},
      {"total_jobs", run.total_jobs()},
  };
}

}  // namespace qcompress
