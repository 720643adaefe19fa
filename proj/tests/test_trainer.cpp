#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qcompress/trainer.hpp"

using namespace qcompress;

namespace {

CompressionConfig small_config(AnsatzFamily f, int n, int latent, int layers) {
  CompressionConfig c;
  c.ansatz = {f, n, layers};
  c.n_input = n;
  c.n_latent = latent;
  return c;
}

std::vector<double> random_theta(int p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  std::vector<double> t(static_cast<std::size_t>(p));
  for (auto& x : t) x = u(rng);
  return t;
}

// 1 - <0|Tr_B(U rho U^dagger)|0> with the trash on the highest qubits.
double oracle_cost(const Circuit& ansatz, const std::vector<double>& theta,
                   const Eigen::VectorXcd& psi, int latent) {
  const int n = ansatz.num_qubits();
  const Eigen::VectorXcd out = oracle::circuit_unitary(ansatz, theta) * psi;
  std::vector<int> trash;
  for (int q = latent; q < n; ++q) trash.push_back(q);
  const auto rho_a = oracle::partial_trace(out * out.adjoint(), n, trash);
  return 1.0 - rho_a(0, 0).real();
}

}  // namespace

TEST(SwapTest, CircuitLayout) {
  const auto ansatz = build({AnsatzFamily::Circuit1, 4, 1});
  const auto st = swap_test_circuit(ansatz, QubitSubset{2, 3});
  EXPECT_EQ(st.num_qubits(), 7);
  const auto& ops = st.ops();
  const auto k = ansatz.ops().size();
  EXPECT_EQ(ops[k].kind, GateKind::H);
  EXPECT_EQ(ops[k].targets, std::vector<int>{6});
  EXPECT_EQ(ops[k + 1].qubits(), (std::vector<int>{6, 2, 4}));
  EXPECT_EQ(ops[k + 2].qubits(), (std::vector<int>{6, 3, 5}));
  EXPECT_EQ(ops.back().kind, GateKind::H);
}

TEST(SwapTest, AncillaLawAgainstPartialTrace) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int latent = 1 + trial % 3;
    const QaeModel model(small_config(AnsatzFamily::Circuit3, 4, latent, 2));
    const auto theta = random_theta(model.num_params(), rng);
    const auto psi = oracle::random_state(4, rng);
    const double j = oracle_cost(model.ansatz(), theta, psi, latent);
    const auto s = StateVector::from_amplitudes(psi);
    EXPECT_NEAR(model.swap_test_p0(theta, s), 0.5 + (1.0 - j) / 2.0, 1e-10);
    EXPECT_NEAR(model.cost(theta, s).value, j, 1e-10);
    EXPECT_NEAR(model.ancilla_cost(theta, s), j / 2.0, 1e-10);
  }
}

TEST(SwapTest, OrthogonalTrashGivesUnitCost) {
  // Trash qubit in |1>: Tr_B leaves |1><1| on the trash, so J = 1.
  const QaeModel model(small_config(AnsatzFamily::Circuit1, 2, 1, 1));
  const std::vector<double> zero(static_cast<std::size_t>(model.num_params()), 0.0);
  // With every RY at 0 the ansatz is a CNOT ring, mapping |10> (qubit 1 set) to |11>.
  const auto s = StateVector::basis(2, 0b10);
  EXPECT_NEAR(model.cost(zero, s).value, 1.0, 1e-12);
  EXPECT_NEAR(model.swap_test_p0(zero, s), 0.5, 1e-12);
}

TEST(Gradient, ParameterShiftMatchesFiniteDifference) {
  std::mt19937_64 rng(8);
  const double h = 1e-5;
  for (auto f : {AnsatzFamily::Circuit1, AnsatzFamily::Circuit2, AnsatzFamily::Circuit3}) {
    const QaeModel model(small_config(f, 4, 2, 2));
    const auto theta = random_theta(model.num_params(), rng);
    std::vector<EncodedImage> batch;
    for (int i = 0; i < 3; ++i) {
      batch.push_back({i, PixelImage{}, StateVector::from_amplitudes(oracle::random_state(4, rng))});
    }
    const auto grad = gradient(model, theta, batch);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      double fd = 0.0;
      for (const auto& img : batch) {
        fd += (oracle_cost(model.ansatz(), tp, img.state.amplitudes(), 2) -
               oracle_cost(model.ansatz(), tm, img.state.amplitudes(), 2)) /
              (2 * h);
      }
      EXPECT_NEAR(grad[j], fd / 3.0, 1e-6) << family_name(f) << " param " << j;
    }
  }
}

TEST(Jobs, PerEpochFormulaMatchesExecution) {
  const QaeModel model(small_config(AnsatzFamily::Circuit1Device3q, 3, 2, 3));
  ASSERT_EQ(model.num_params(), 12);
  std::vector<EncodedImage> batch(5, EncodedImage{0, PixelImage{}, StateVector(3)});
  const auto eval = evaluate_batch(model, std::vector<double>(12, 0.3), batch);
  EXPECT_EQ(eval.jobs, 25u * 5u);
  EXPECT_EQ(jobs_per_epoch(12, 20, 1), 500u);
  EXPECT_EQ(jobs_per_epoch(12, 20, 10), 5000u);
}

TEST(Decompress, MatchesConjugationOracle) {
  std::mt19937_64 rng(4);
  const QaeModel model(small_config(AnsatzFamily::Circuit3, 3, 2, 2));
  const auto theta = random_theta(model.num_params(), rng);
  const auto latent_m = oracle::random_density(2, rng);
  const auto got = model.decompress(theta, DensityMatrix::from_matrix(latent_m));
  const auto u = oracle::circuit_unitary(model.ansatz(), theta);
  const auto embedded = oracle::kron(oracle::proj(0), latent_m);  // trash is qubit 2
  EXPECT_LT((got.matrix() - u.adjoint() * embedded * u).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Decompress, PerfectlyCompressibleStateRoundTrips) {
  std::mt19937_64 rng(12);
  const QaeModel model(small_config(AnsatzFamily::Circuit1, 4, 2, 3));
  const auto theta = random_theta(model.num_params(), rng);
  // psi = U^dagger (phi on the latent qubits, |00> on the trash).
  Eigen::VectorXcd code = Eigen::VectorXcd::Zero(16);
  code.head(4) = oracle::random_state(2, rng);
  const Eigen::VectorXcd psi = oracle::circuit_unitary(model.ansatz(), theta).adjoint() * code;
  const auto s = StateVector::from_amplitudes(psi);
  EXPECT_NEAR(model.cost(theta, s).value, 0.0, 1e-12);
  const auto back = model.decompress(theta, model.compress(theta, s));
  EXPECT_NEAR(fidelity(s, back), 1.0, 1e-9);
}

TEST(ShotsMode, UnbiasedAndSeeded) {
  std::mt19937_64 rng(30);
  auto cfg = small_config(AnsatzFamily::Circuit3, 4, 3, 2);
  const QaeModel exact(cfg);
  cfg.eval = {EvalMode::Shots, 8192, 99};
  const QaeModel shots(cfg);
  const auto theta = random_theta(exact.num_params(), rng);
  const auto s = StateVector::from_amplitudes(oracle::random_state(4, rng));
  const double j = exact.cost(theta, s).value;
  const double p0 = 1.0 - j / 2.0;
  const double sigma = 2.0 * std::sqrt(p0 * (1 - p0) / 8192.0);
  EXPECT_NEAR(shots.cost(theta, s, 5).raw, j, 5 * sigma + 1e-12);
  EXPECT_EQ(shots.cost(theta, s, 5).raw, shots.cost(theta, s, 5).raw);
}

TEST(Training, DeterministicAndAccounted) {
  const auto split = make_split(bars_and_stripes_2x4(), SplitOptions{10, 2, 5, 2, std::nullopt});
  auto cfg = small_config(AnsatzFamily::Circuit1Device3q, 3, 2, 3);
  cfg.epochs = 3;
  cfg.n_iter = 1;
  cfg.batch_size = 5;
  cfg.init_seed = 2;
  int callbacks = 0;
  const auto a = train(split, cfg, [&](const EpochRecord&) { ++callbacks; });
  const auto b = train(split, cfg);
  EXPECT_EQ(callbacks, 3);
  ASSERT_EQ(a.records.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(a.records[e].mean_loss, b.records[e].mean_loss);
    EXPECT_EQ(a.records[e].theta, b.records[e].theta);
    EXPECT_EQ(a.records[e].jobs_executed, 500u);
    EXPECT_GE(a.records[e].mean_loss, 0.0);
    EXPECT_LE(a.records[e].mean_loss, 1.0);
  }
  EXPECT_EQ(a.total_jobs(), 1500u);
  EXPECT_EQ(a.manifest.train_size, 20u);
  EXPECT_EQ(a.manifest.test_ids.size(), 8u);
}

TEST(Training, BestThetaIsLowestLossSnapshot) {
  const auto split = make_split(bars_and_stripes_2x4(), SplitOptions{10, 2, 5, 1, std::nullopt});
  auto cfg = small_config(AnsatzFamily::Circuit1Device3q, 3, 2, 2);
  cfg.epochs = 4;
  cfg.n_iter = 1;
  cfg.batch_size = 5;
  const auto run = train(split, cfg);
  const auto best = std::min_element(run.records.begin(), run.records.end(),
                                     [](const auto& x, const auto& y) { return x.mean_loss < y.mean_loss; });
  EXPECT_EQ(run.best_theta, best->theta);
}

TEST(Training, RejectsMismatchedInput) {
  const auto split = make_split(bars_and_stripes_2x4(), SplitOptions{10, 2, 5, 1, std::nullopt});
  auto cfg = small_config(AnsatzFamily::Circuit1, 4, 2, 2);
  EXPECT_THROW(train(split, cfg), std::domain_error);
  cfg = small_config(AnsatzFamily::Circuit1Device3q, 3, 2, 2);
  cfg.batch_size = 3;
  EXPECT_THROW(train(split, cfg), std::domain_error);
}

TEST(Evaluate, FidelitiesInUnitInterval) {
  const auto split = make_split(bars_and_stripes_2x4(), SplitOptions{10, 2, 5, 2, std::nullopt});
  auto cfg = small_config(AnsatzFamily::Circuit1Device3q, 3, 2, 3);
  cfg.epochs = 2;
  cfg.n_iter = 1;
  cfg.batch_size = 5;
  const auto run = train(split, cfg);
  const auto fids = evaluate(run, split.test);
  ASSERT_EQ(fids.size(), split.test.size());
  for (const auto& f : fids) {
    EXPECT_GE(f.fidelity, 0.0);
    EXPECT_LE(f.fidelity, 1.0 + 1e-9);
    EXPECT_EQ(f.latent.num_qubits(), 2);
    EXPECT_EQ(f.decompressed.num_qubits(), 3);
  }
}
