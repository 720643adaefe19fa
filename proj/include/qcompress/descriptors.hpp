#pragma once

// Circuit descriptors: expressibility as the KL divergence between the
// sampled pairwise-fidelity histogram and the Haar fidelity distribution,
// and entangling capability as the mean Meyer-Wallach measure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcompress/circuit.hpp"
#include "qcompress/core.hpp"
#include "qcompress/format.hpp"
#include "qcompress/random.hpp"

namespace qcompress {

struct DescriptorConfig {
  int num_samples = 5000;           // parameter pairs for expressibility
  int num_bins = 75;
  int entanglement_samples = 2000;  // parameter draws for entangling capability
  std::uint64_t seed = 0;

  void validate() const {
    if (num_samples < 100) throw std::domain_error("descriptor sampling needs >= 100 samples");
    if (entanglement_samples < 100) {
      throw std::domain_error("entangling capability needs >= 100 samples");
    }
    if (num_bins < 10) throw std::domain_error("descriptor histogram needs >= 10 bins");
  }
};

/// Haar measure of fidelities in [low, high) for Hilbert-space dimension N:
/// the integral of (N-1)(1-F)^(N-2), i.e. (1-low)^(N-1) - (1-high)^(N-1).
inline double haar_bin_mass(double low, double high, std::size_t dimension) {
  if (!(0.0 <= low && low < high && high <= 1.0)) {
    throw std::domain_error("haar_bin_mass needs 0 <= low < high <= 1");
  }
  if (dimension < 2) throw std::domain_error("haar_bin_mass needs dimension >= 2");
  const double e = static_cast<double>(dimension - 1);
  return std::pow(1.0 - low, e) - std::pow(1.0 - high, e);
}

struct FidelityHistogram {
  std::vector<double> edges;  // num_bins + 1 entries
  std::vector<long> counts;
  std::vector<double> haar_mass;
};

struct ExpressibilityResult {
  double bits = 0.0;
  double nats = 0.0;
  FidelityHistogram histogram;
};

namespace detail {

inline StateVector sample_state(const Circuit& circuit, rng_t& rng) {
  const auto theta = uniform_angles(static_cast<std::size_t>(circuit.num_params()), rng);
  return apply(circuit, theta, StateVector(circuit.num_qubits()));
}

}  // namespace detail

/// KL divergence of the sampled fidelity histogram from the Haar bin
/// masses. Empty bins contribute nothing.
inline ExpressibilityResult expressibility(const Circuit& circuit, const DescriptorConfig& config) {
  config.validate();
  const auto bins = static_cast<std::size_t>(config.num_bins);
  const std::size_t dim = std::size_t{1} << circuit.num_qubits();

  ExpressibilityResult out;
  auto& h = out.histogram;
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(static_cast<double>(b) / static_cast<double>(bins));
  }
  for (std::size_t b = 0; b < bins; ++b) {
    h.haar_mass.push_back(haar_bin_mass(h.edges[b], h.edges[b + 1], dim));
  }

  for (int s = 0; s < config.num_samples; ++s) {
    auto rng = make_stream(config.seed, static_cast<std::uint64_t>(s));
    const auto a = detail::sample_state(circuit, rng);
    const auto b = detail::sample_state(circuit, rng);
    const double f = state_overlap(a, b);
    auto bin = static_cast<std::size_t>(f * static_cast<double>(bins));
    if (bin >= bins) bin = bins - 1;
    ++h.counts[bin];
  }

  for (std::size_t b = 0; b < bins; ++b) {
    if (h.counts[b] == 0) continue;
    const double p = static_cast<double>(h.counts[b]) / config.num_samples;
    out.nats += p * std::log(p / h.haar_mass[b]);
  }
  out.bits = out.nats / std::log(2.0);
  return out;
}

/// (1/n) sum_k 2 (1 - Tr[rho_k^2]) over single-qubit marginals.
inline double meyer_wallach(const StateVector& state) {
  const int n = state.num_qubits();
  if (n < 2) throw std::domain_error("Meyer-Wallach measure needs at least 2 qubits");
  double q = 0.0;
  for (int k = 0; k < n; ++k) {
    std::vector<int> others;
    for (int j = 0; j < n; ++j) {
      if (j != k) others.push_back(j);
    }
    q += 2.0 * (1.0 - purity(reduced_density(state, QubitSubset(others))));
  }
  return std::clamp(q / n, 0.0, 1.0);
}

inline double entangling_capability(const Circuit& circuit, const DescriptorConfig& config) {
  config.validate();
  if (circuit.num_qubits() < 2) {
    throw std::domain_error("entangling capability needs at least 2 qubits");
  }
  double total = 0.0;
  for (int s = 0; s < config.entanglement_samples; ++s) {
    // Streams above the expressibility range keep the two estimates independent.
    auto rng = make_stream(config.seed, (std::uint64_t{1} << 40) + static_cast<std::uint64_t>(s));
    total += meyer_wallach(detail::sample_state(circuit, rng));
  }
  return total / config.entanglement_samples;
}

struct DescriptorReport {
  std::string label;
  int num_qubits = 0;
  int layers = 0;
  double expressibility_bits = 0.0;
  double expressibility_nats = 0.0;
  double entangling_capability = 0.0;
  DescriptorConfig config;
  FidelityHistogram histogram;
};

inline DescriptorReport describe(const Circuit& circuit, const DescriptorConfig& config,
                                 std::string label = {}, int layers = 0) {
  const auto ex = expressibility(circuit, config);
  DescriptorReport r;
  r.label = std::move(label);
  r.num_qubits = circuit.num_qubits();
  r.layers = layers;
  r.expressibility_bits = ex.bits;
  r.expressibility_nats = ex.nats;
  r.entangling_capability =
      circuit.num_qubits() >= 2 ? entangling_capability(circuit, config) : 0.0;
  r.config = config;
  r.histogram = ex.histogram;
  return r;
}

inline nlohmann::json to_json(const DescriptorReport& r) {
  return {
      {"circuit", r.label},
      {"qubits", r.num_qubits},
      {"layers", r.layers},
      {"expressibility_bits", r.expressibility_bits},
      {"expressibility_nats", r.expressibility_nats},
      {"entangling_capability", r.entangling_capability},
      {"config",
       {{"num_samples", r.config.num_samples},
        {"num_bins", r.config.num_bins},
        {"entanglement_samples", r.config.entanglement_samples},
        {"seed", r.config.seed}}},
  };
}

inline void write_histogram_csv(std::ostream& os, const FidelityHistogram& h) {
  os << "bin_low,bin_high,count,haar_mass\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    os << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ','
       << h.counts[b] << ',' << format_double(h.haar_mass[b]) << '\n';
  }
}

}  // namespace qcompress
