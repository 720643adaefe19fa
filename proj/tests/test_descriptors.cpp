#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qcompress/ansatz.hpp"
#include "qcompress/descriptors.hpp"

using namespace qcompress;

TEST(HaarMass, SumsToOneAndMatchesMonteCarloMean) {
  const std::size_t dim = 16;
  double total = 0.0;
  double mean = 0.0;
  const int bins = 1000;
  for (int b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / bins, hi = static_cast<double>(b + 1) / bins;
    const double m = haar_bin_mass(lo, hi, dim);
    total += m;
    mean += m * (lo + hi) / 2;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(mean, 1.0 / dim, 1e-4);  // analytic Haar mean fidelity is 1/N

  std::mt19937_64 rng(2);
  double mc = 0.0;
  const int samples = 20000;
  for (int s = 0; s < samples; ++s) {
    const auto a = oracle::random_state(4, rng);
    const auto b = oracle::random_state(4, rng);
    mc += std::norm(a.dot(b));
  }
  EXPECT_NEAR(mc / samples, 1.0 / dim, 4e-3);
}

TEST(HaarMass, RejectsBadRanges) {
  EXPECT_THROW(haar_bin_mass(0.5, 0.4, 4), std::domain_error);
  EXPECT_THROW(haar_bin_mass(0.0, 1.1, 4), std::domain_error);
  EXPECT_THROW(haar_bin_mass(0.0, 0.5, 1), std::domain_error);
}

TEST(Expressibility, IdleCircuitIsPointMass) {
  // Every fidelity is 1, landing in the last bin with Haar mass (1/75)^15.
  DescriptorConfig cfg;
  cfg.num_samples = 200;
  const auto r = expressibility(Circuit(4, 0), cfg);
  EXPECT_NEAR(r.nats, 15.0 * std::log(75.0), 1e-9);
  EXPECT_NEAR(r.bits, 15.0 * std::log2(75.0), 1e-9);
  EXPECT_NEAR(r.bits, 93.4, 0.05);
  EXPECT_EQ(r.histogram.counts.back(), 200);
}

TEST(Expressibility, SeededAndBinned) {
  DescriptorConfig cfg;
  cfg.num_samples = 300;
  cfg.seed = 4;
  const auto c = build({AnsatzFamily::Circuit1, 3, 2});
  const auto a = expressibility(c, cfg);
  const auto b = expressibility(c, cfg);
  EXPECT_EQ(a.nats, b.nats);
  EXPECT_EQ(a.histogram.edges.size(), 76u);
  long total = 0;
  for (auto n : a.histogram.counts) total += n;
  EXPECT_EQ(total, 300);
  EXPECT_GT(a.nats, 0.0);
}

TEST(MeyerWallach, ProductAndGhzLimits) {
  EXPECT_NEAR(meyer_wallach(StateVector(3)), 0.0, 1e-12);
  Eigen::VectorXcd ghz = Eigen::VectorXcd::Zero(8);
  ghz(0) = ghz(7) = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(meyer_wallach(StateVector::from_amplitudes(ghz)), 1.0, 1e-12);
  // Bell pair on qubits 0,1 times |0> on qubit 2: two maximally mixed marginals of three.
  Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(8);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(meyer_wallach(StateVector::from_amplitudes(bell)), 2.0 / 3.0, 1e-12);
  EXPECT_THROW(meyer_wallach(StateVector(1)), std::domain_error);
}

TEST(EntanglingCapability, RotationOnlyCircuitIsZero) {
  DescriptorConfig cfg;
  cfg.entanglement_samples = 100;
  const auto c = CircuitBuilder(3).ry(0).rx(1).rz(2).ry(2).build();
  EXPECT_NEAR(entangling_capability(c, cfg), 0.0, 1e-12);
}

TEST(Descriptors, ConfigValidationAndCsv) {
  DescriptorConfig bad;
  bad.num_samples = 10;
  EXPECT_THROW(bad.validate(), std::domain_error);
  DescriptorConfig cfg;
  cfg.num_samples = 100;
  cfg.entanglement_samples = 100;
  const auto r = describe(build({AnsatzFamily::Circuit1, 2, 1}), cfg, "circuit1", 1);
  std::ostringstream os;
  write_histogram_csv(os, r.histogram);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "bin_low,bin_high,count,haar_mass");
  const auto j = to_json(r);
  EXPECT_EQ(j.at("circuit"), "circuit1");
  EXPECT_TRUE(j.contains("expressibility_nats"));
}
