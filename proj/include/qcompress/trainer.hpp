#pragma once

// Quantum autoencoder training: swap-test circuit, trash-state cost,
// parameter-shift gradient descent, decompression and fidelity scoring.
//
// Cost convention: J = 1 - <0|Tr_B(U rho U^dagger)|0>, so an orthogonal trash
// state costs 1. The swap-test ancilla reads 0 with probability (1 + (1 - J))/2,
// and ancilla_cost() exposes the ancilla-based convention 1 - P(0) = J/2.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcompress/ansatz.hpp"
#include "qcompress/circuit.hpp"
#include "qcompress/core.hpp"
#include "qcompress/datasets.hpp"
#include "qcompress/random.hpp"

namespace qcompress {

enum class EvalMode { ExactExpectation, Shots };

struct EvalSettings {
  EvalMode mode = EvalMode::ExactExpectation;
  long shots = 8192;
  std::uint64_t seed = 0;
};

struct CompressionConfig {
  AnsatzSpec ansatz;
  int n_input = 4;
  int n_latent = 3;
  // Empty means the highest-index data qubits.
  std::vector<int> trash;
  double learning_rate = 0.05;
  int epochs = 40;
  int n_iter = 10;
  int batch_size = 7;
  EvalSettings eval;
  std::uint64_t init_seed = 0;

  QubitSubset trash_qubits() const {
    if (trash.empty()) return QubitSubset::highest(n_input, n_input - n_latent);
    return QubitSubset(trash);
  }

  void validate() const {
    ansatz.validate();
    if (ansatz.num_qubits != n_input) {
      throw std::domain_error("ansatz qubit count must equal the input qubit count");
    }
    if (n_latent < 1 || n_latent >= n_input) {
      throw std::domain_error("latent qubit count must be in [1, n_input)");
    }
    const auto t = trash_qubits();
    t.check_within(n_input);
    if (static_cast<int>(t.size()) != n_input - n_latent) {
      throw std::domain_error("trash size must equal n_input - n_latent");
    }
    if (!(learning_rate > 0.0)) throw std::domain_error("learning rate must be positive");
    if (epochs < 0) throw std::domain_error("epochs must be >= 0");
    if (n_iter < 1) throw std::domain_error("n_iter must be >= 1");
    if (batch_size < 1) throw std::domain_error("batch size must be >= 1");
    if (eval.mode == EvalMode::Shots && eval.shots < 1) {
      throw std::domain_error("shots must be >= 1");
    }
  }
};

/// Data register 0..n-1, reference qubits n..n+t-1 in |0>, ancilla n+t.
/// Ancilla H, CSWAP(ancilla; trash_i, reference_i) for each i, ancilla H.
inline Circuit swap_test_circuit(const Circuit& ansatz, const QubitSubset& trash) {
  const int n = ansatz.num_qubits();
  trash.check_within(n);
  const int t = static_cast<int>(trash.size());
  if (t >= n) throw std::domain_error("trash must leave at least one latent qubit");
  const int ancilla = n + t;
  std::vector<GateOp> ops = ansatz.ops();
  ops.push_back(GateOp{GateKind::H, {ancilla}, std::nullopt, std::nullopt, false});
  for (int i = 0; i < t; ++i) {
    ops.push_back(GateOp{GateKind::CSWAP,
                         {trash.indices()[static_cast<std::size_t>(i)], n + i},
                         ancilla, std::nullopt, false});
  }
  ops.push_back(GateOp{GateKind::H, {ancilla}, std::nullopt, std::nullopt, false});
  return Circuit(n + t + 1, ansatz.num_params(), std::move(ops));
}

struct CostValue {
  double value = 0.0;  // clamped to [0, 1]
  double raw = 0.0;    // shot estimate before clamping
};

/// The compression circuits for one configuration.
class QaeModel {
 public:
  explicit QaeModel(CompressionConfig config)
      : config_(std::move(config)),
        ansatz_(build(config_.ansatz)),
        trash_(config_.trash_qubits()),
        swap_test_(swap_test_circuit(ansatz_, trash_)) {
    config_.validate();
    for (std::size_t i = 0; i < (std::size_t{1} << config_.n_input); ++i) {
      bool clear = true;
      for (int q : trash_.indices()) clear = clear && !((i >> q) & 1u);
      if (clear) trash_clear_.push_back(i);
    }
  }

  const CompressionConfig& config() const { return config_; }
  const Circuit& ansatz() const { return ansatz_; }
  const Circuit& swap_test() const { return swap_test_; }
  const QubitSubset& trash() const { return trash_; }
  int num_params() const { return ansatz_.num_params(); }

  /// <0|rho_A|0> for the trash marginal rho_A of U|phi>. The (0,0) entry of
  /// Tr_B is the probability mass on basis states whose trash bits are 0.
  double trash_overlap(std::span<const double> theta, const StateVector& input) const {
    detail::check_theta(ansatz_, theta);
    check_input(input);
    Eigen::VectorXcd amps = input.amplitudes();
    detail::run_inplace(ansatz_, theta, amps);
    double mass = 0.0;
    for (auto i : trash_clear_) mass += std::norm(amps(static_cast<Eigen::Index>(i)));
    return std::clamp(mass, 0.0, 1.0);
  }

  /// Probability that the swap-test ancilla reads 0, computed exactly.
  double swap_test_p0(std::span<const double> theta, const StateVector& input) const {
    const auto out = run_swap_test(theta, input);
    return 1.0 - probability_one(out, swap_test_.num_qubits() - 1);
  }

  /// Cost of one image. `job` selects the RNG stream in shots mode.
  CostValue cost(std::span<const double> theta, const StateVector& input,
                 std::uint64_t job = 0) const {
    if (config_.eval.mode == EvalMode::ExactExpectation) {
      const double j = 1.0 - trash_overlap(theta, input);
      return {j, j};
    }
    const auto out = run_swap_test(theta, input);
    const auto counts = measure_qubit(out, swap_test_.num_qubits() - 1, config_.eval.shots,
                                      job_seed(job));
    const double p0 = static_cast<double>(counts.count0) / static_cast<double>(config_.eval.shots);
    const double raw = 1.0 - (2.0 * p0 - 1.0);
    return {std::clamp(raw, 0.0, 1.0), raw};
  }

  /// 1 - P(ancilla = 0) = J / 2.
  double ancilla_cost(std::span<const double> theta, const StateVector& input) const {
    return 1.0 - swap_test_p0(theta, input);
  }

  /// U^dagger applied to |0><0| on the trash qubits tensored with `latent`
  /// on the remaining qubits (ascending order).
  DensityMatrix decompress(std::span<const double> theta, const DensityMatrix& latent) const {
    const int n = config_.n_input;
    if (latent.num_qubits() != config_.n_latent) {
      throw std::domain_error("latent state has " + std::to_string(latent.num_qubits()) +
                              " qubits, expected " + std::to_string(config_.n_latent));
    }
    const auto kept = trash_.complement(n);
    const auto full_dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(full_dim, full_dim);
    for (std::size_t a = 0; a < latent.dimension(); ++a) {
      const auto ia = static_cast<Eigen::Index>(detail::scatter_bits(a, kept));
      for (std::size_t b = 0; b < latent.dimension(); ++b) {
        full(ia, static_cast<Eigen::Index>(detail::scatter_bits(b, kept))) = latent(a, b);
      }
    }
    return apply_to_density(adjoint(ansatz_), theta, DensityMatrix::unchecked(std::move(full)));
  }

  /// Latent state Tr_A(U|phi><phi|U^dagger).
  DensityMatrix compress(std::span<const double> theta, const StateVector& input) const {
    check_input(input);
    return reduced_density(apply(ansatz_, theta, input), trash_);
  }

  std::uint64_t job_seed(std::uint64_t job) const {
    auto rng = make_stream(config_.eval.seed, job);
    return rng();
  }

 private:
  void check_input(const StateVector& input) const {
    if (input.num_qubits() != config_.n_input) {
      throw std::domain_error("input state has " + std::to_string(input.num_qubits()) +
                              " qubits, expected " + std::to_string(config_.n_input));
    }
  }

  StateVector run_swap_test(std::span<const double> theta, const StateVector& input) const {
    detail::check_theta(ansatz_, theta);
    check_input(input);
    const StateVector padded = input.tensor(StateVector(static_cast<int>(trash_.size()) + 1));
    return apply(swap_test_, theta, padded);
  }

  CompressionConfig config_;
  Circuit ansatz_;
  QubitSubset trash_;
  Circuit swap_test_;
  std::vector<std::size_t> trash_clear_;
};

inline constexpr double kParameterShift = std::numbers::pi / 2.0;

struct BatchEvaluation {
  double mean_cost = 0.0;
  double mean_raw_cost = 0.0;
  std::vector<double> gradient;
  std::uint64_t jobs = 0;
};

/// One cost run plus two shifted runs per parameter for every image; the
/// gradient is the batch mean of (J(theta_j + pi/2) - J(theta_j - pi/2)) / 2.
inline BatchEvaluation evaluate_batch(const QaeModel& model, std::span<const double> theta,
                                      std::span<const EncodedImage> batch,
                                      std::uint64_t first_job = 0) {
  if (batch.empty()) throw std::domain_error("gradient of an empty batch");
  const auto p = static_cast<std::size_t>(model.num_params());
  BatchEvaluation out;
  out.gradient.assign(p, 0.0);
  std::vector<double> shifted(theta.begin(), theta.end());
  std::uint64_t job = first_job;
  for (const auto& img : batch) {
    const auto c = model.cost(theta, img.state, job++);
    out.mean_cost += c.value;
    out.mean_raw_cost += c.raw;
    for (std::size_t j = 0; j < p; ++j) {
      shifted[j] = theta[j] + kParameterShift;
      const double plus = model.cost(shifted, img.state, job++).value;
      shifted[j] = theta[j] - kParameterShift;
      const double minus = model.cost(shifted, img.state, job++).value;
      shifted[j] = theta[j];
      out.gradient[j] += (plus - minus) / 2.0;
    }
  }
  const auto count = static_cast<double>(batch.size());
  out.mean_cost /= count;
  out.mean_raw_cost /= count;
  for (auto& g : out.gradient) g /= count;
  out.jobs = job - first_job;
  return out;
}

inline std::vector<double> gradient(const QaeModel& model, std::span<const double> theta,
                                    std::span<const EncodedImage> batch) {
  return evaluate_batch(model, theta, batch).gradient;
}

/// Circuit executions per epoch: (2 * params + 1) * images * iterations.
inline std::uint64_t jobs_per_epoch(int num_params, std::size_t num_images, int n_iter) {
  return (2 * static_cast<std::uint64_t>(num_params) + 1) * num_images *
         static_cast<std::uint64_t>(n_iter);
}

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double mean_loss_raw = 0.0;
  std::vector<double> theta;  // snapshot at epoch end
  std::uint64_t jobs_executed = 0;
  double wall_clock_seconds = 0.0;
};

struct RunManifest {
  std::string dataset;
  std::uint64_t split_seed = 0;
  std::vector<int> train_ids;
  std::vector<int> test_ids;
  std::size_t train_size = 0;  // augmented
};

struct TrainRun {
  CompressionConfig config;
  std::vector<EpochRecord> records;
  std::vector<double> initial_theta;
  std::vector<double> best_theta;
  RunManifest manifest;

  std::uint64_t total_jobs() const {
    std::uint64_t t = 0;
    for (const auto& r : records) t += r.jobs_executed;
    return t;
  }
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch gradient descent: every batch takes n_iter steps
/// theta <- theta - eta * grad. An epoch's mean loss averages the unshifted
/// cost runs it executed.
inline TrainRun train(const DatasetSplit& split, const CompressionConfig& config,
                      const EpochCallback& on_epoch = {}) {
  const QaeModel model(config);
  if (split.train.empty()) throw std::domain_error("training set is empty");
  if (split.train.front().state.num_qubits() != config.n_input) {
    throw std::domain_error("encoded images do not match the ansatz qubit count");
  }
  const auto batch = static_cast<std::size_t>(config.batch_size);
  if (split.train.size() % batch != 0) {
    throw std::domain_error("batch size does not divide the training set");
  }

  TrainRun run;
  run.config = config;
  run.manifest.split_seed = split.seed;
  run.manifest.train_ids = split.train_ids;
  run.manifest.train_size = split.train.size();
  for (const auto& t : split.test) run.manifest.test_ids.push_back(t.id);
  run.initial_theta = initial_parameters(model.ansatz(), config.init_seed);
  run.best_theta = run.initial_theta;

  std::vector<double> theta = run.initial_theta;
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t job = 0;
  const std::span<const EncodedImage> images(split.train);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    double raw_sum = 0.0;
    std::size_t evaluations = 0;
    std::uint64_t epoch_jobs = 0;
    for (std::size_t b = 0; b < images.size(); b += batch) {
      const auto chunk = images.subspan(b, batch);
      for (int it = 0; it < config.n_iter; ++it) {
        const auto eval = evaluate_batch(model, theta, chunk, job);
        job += eval.jobs;
        epoch_jobs += eval.jobs;
        loss_sum += eval.mean_cost * static_cast<double>(chunk.size());
        raw_sum += eval.mean_raw_cost * static_cast<double>(chunk.size());
        evaluations += chunk.size();
        for (std::size_t j = 0; j < theta.size(); ++j) {
          theta[j] -= config.learning_rate * eval.gradient[j];
        }
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(evaluations);
    rec.mean_loss_raw = raw_sum / static_cast<double>(evaluations);
    rec.theta = theta;
    rec.jobs_executed = epoch_jobs;
    rec.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!(rec.mean_loss <= 1.0 + 1e-6)) {
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                               ": mean loss " + std::to_string(rec.mean_loss));
    }
    if (rec.mean_loss < best) {
      best = rec.mean_loss;
      run.best_theta = theta;
    }
    if (on_epoch) on_epoch(rec);
    run.records.push_back(std::move(rec));
  }
  return run;
}

struct ImageFidelity {
  int image_id = 0;
  double fidelity = 0.0;
  DensityMatrix latent = DensityMatrix::maximally_mixed(1);
  DensityMatrix decompressed = DensityMatrix::maximally_mixed(1);
};

/// Compress with best_theta, trace out the trash, decompress, and score
/// against the original pure state.
inline std::vector<ImageFidelity> evaluate(const TrainRun& run,
                                           std::span<const EncodedImage> test) {
  const QaeModel model(run.config);
  std::vector<ImageFidelity> out;
  out.reserve(test.size());
  for (const auto& img : test) {
    auto latent = model.compress(run.best_theta, img.state);
    auto decompressed = model.decompress(run.best_theta, latent);
    const double f = fidelity(img.state, decompressed);
    out.push_back({img.id, f, std::move(latent), std::move(decompressed)});
  }
  return out;
}

}  // namespace qcompress
