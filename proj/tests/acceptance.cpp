// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qcompress/descriptors.hpp"
#include "qcompress/experiment.hpp"

using namespace qcompress;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> random_theta(int p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  std::vector<double> t(static_cast<std::size_t>(p));
  for (auto& x : t) x = u(rng);
  return t;
}

// <0|rho_trash|0> from the Kronecker unitary and the loop partial trace.
double oracle_trash_overlap(const Circuit& ansatz, const std::vector<double>& theta,
                            const Eigen::VectorXcd& psi, const std::vector<int>& trash) {
  const int n = ansatz.num_qubits();
  const Eigen::VectorXcd out = oracle::circuit_unitary(ansatz, theta) * psi;
  return oracle::partial_trace(out * out.adjoint(), n, trash)(0, 0).real();
}

CompressionConfig qae_config(AnsatzFamily f, int n, int latent, int layers) {
  CompressionConfig c;
  c.ansatz = {f, n, layers};
  c.n_input = n;
  c.n_latent = latent;
  return c;
}

// ---------------------------------------------------------------------------

Outcome resource_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  // Closed forms {params, two-qubit gates, depth}, written out independently.
  const std::map<AnsatzFamily, std::function<ResourceCount(int, int)>> table = {
      {AnsatzFamily::Circuit1, [](int n, int l) { return ResourceCount{n * (l + 1), n * l, (n + 1) * l + 1}; }},
      {AnsatzFamily::Circuit2, [](int n, int l) { return ResourceCount{4 * (n - 1) * l, (n - 1) * l, 6 * l}; }},
      {AnsatzFamily::Circuit3, [](int n, int l) { return ResourceCount{3 * n * l, n * l, (n + 3) * l}; }},
  };
  int cells = 0;
  std::vector<std::string> bad;
  for (const auto& [family, formula] : table) {
    for (int n = 2; n <= 6; ++n) {
      for (int l = 1; l <= 8; ++l) {
        ++cells;
        const auto got = resource_count(build({family, n, l}));
        const auto want = formula(n, l);
        if (!(got == want)) {
          bad.push_back(std::string(family_name(family)) + "(n=" + std::to_string(n) +
                        ",L=" + std::to_string(l) + ") depth " + std::to_string(got.depth) +
                        " vs " + std::to_string(want.depth));
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(cells - static_cast<int>(bad.size())) + "/" +
                       std::to_string(cells) + " cells match, " + fmt(secs, 3) + " s";
  if (!bad.empty()) detail += "; first mismatch " + bad.front();
  return {bad.empty() && secs < 1.0, detail};
}

Outcome descriptor_table() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Target {
    AnsatzFamily family;
    double eps, eps_tol, ent;
  };
  const Target targets[] = {{AnsatzFamily::Circuit1, 0.130, 0.03, 0.800},
                            {AnsatzFamily::Circuit2, 0.008, 0.01, 0.743},
                            {AnsatzFamily::Circuit3, 0.005, 0.01, 0.826}};
  DescriptorConfig cfg;  // 5000 pairs, 75 bins, 2000 entanglement samples
  cfg.seed = 2024;
  bool ok = true;
  std::string detail;
  for (const auto& t : targets) {
    const auto r = describe(build({t.family, 4, 3}), cfg);
    const bool pass = std::abs(r.expressibility_nats - t.eps) <= t.eps_tol &&
                      std::abs(r.entangling_capability - t.ent) <= 0.02;
    ok = ok && pass;
    detail += std::string(family_name(t.family)) + " eps=" + fmt(r.expressibility_nats) +
              " E=" + fmt(r.entangling_capability) + "; ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 120.0, detail + fmt(secs, 1) + " s"};
}

Outcome swap_test_law() {
  std::mt19937_64 rng(1001);
  const AnsatzFamily families[] = {AnsatzFamily::Circuit1, AnsatzFamily::Circuit2,
                                   AnsatzFamily::Circuit3};
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int n = 3 + i % 2;
    const int latent = 1 + (i / 2) % (n - 1);
    const QaeModel model(qae_config(families[i % 3], n, latent, 1 + i % 3));
    const auto theta = random_theta(model.num_params(), rng);
    const auto psi = oracle::random_state(n, rng);
    const double overlap = oracle_trash_overlap(model.ansatz(), theta, psi, model.trash().indices());
    const double p0 = model.swap_test_p0(theta, StateVector::from_amplitudes(psi));
    worst = std::max(worst, std::abs(p0 - (0.5 + overlap / 2.0)));
  }
  return {worst < 1e-9, "200 instances, max |err| = " + sci(worst)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(2002);
  const AnsatzFamily families[] = {AnsatzFamily::Circuit1, AnsatzFamily::Circuit2,
                                   AnsatzFamily::Circuit3};
  const auto images = encode_all(framed_4x4_dataset());
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int latent = 1 + i % 3;
    const QaeModel model(qae_config(families[i % 3], 4, latent, 1 + i % 3));
    const auto theta = random_theta(model.num_params(), rng);
    const auto& img = images[static_cast<std::size_t>(rng() % images.size())];
    const std::vector<EncodedImage> batch{img};
    const auto grad = gradient(model, theta, batch);
    const auto& trash = model.trash().indices();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      // J = 1 - overlap, so dJ = -(d overlap).
      const double fd = -(oracle_trash_overlap(model.ansatz(), tp, img.state.amplitudes(), trash) -
                          oracle_trash_overlap(model.ansatz(), tm, img.state.amplitudes(), trash)) /
                        (2 * h);
      worst = std::max(worst, std::abs(grad[j] - fd));
    }
  }
  return {worst < 1e-4, "50 triples, max componentwise |err| = " + sci(worst)};
}

Outcome job_accounting() {
  const auto split =
      make_split(bars_and_stripes_2x4(), SplitOptions{10, 2, 5, 1, std::nullopt});
  bool ok = true;
  std::string detail;
  for (int n_iter : {1, 2, 3}) {
    auto cfg = qae_config(AnsatzFamily::Circuit1Device3q, 3, 2, 3);
    cfg.epochs = 1;
    cfg.n_iter = n_iter;
    cfg.batch_size = 5;
    const auto run = train(split, cfg);
    const auto jobs = run.records.front().jobs_executed;
    ok = ok && jobs == 500u * static_cast<unsigned>(n_iter);
    detail += "N_iter=" + std::to_string(n_iter) + ": " + std::to_string(jobs) + " jobs; ";
  }
  ok = ok && build({AnsatzFamily::Circuit1Device3q, 3, 3}).num_params() == 12 &&
       split.train.size() == 20;
  return {ok, detail + "params=12, images=20"};
}

struct SeedRun {
  std::uint64_t seed;
  TrainRun run;
  std::vector<ImageFidelity> fidelities;
  double mean_epoch_seconds;
};

SeedRun train_cell(DatasetKind kind, AnsatzFamily family, int layers, Compression comp,
                   std::uint64_t seed) {
  auto cfg = ExperimentConfig::defaults(kind);
  cfg.seed = seed;
  cfg.eval.seed = seed;
  const GridCell cell{family, layers, comp};
  const auto split = make_split(dataset_images(kind), cfg.split_options());
  auto run = train(split, cell_config(cfg, cell));
  auto fids = evaluate(run, split.test);
  double secs = 0.0;
  for (const auto& r : run.records) secs += r.wall_clock_seconds;
  secs /= static_cast<double>(run.records.size());
  return {seed, std::move(run), std::move(fids), secs};
}

Outcome best_of_three(DatasetKind kind, AnsatzFamily family, int layers, Compression comp,
                      double threshold, double time_budget) {
  const auto t0 = std::chrono::steady_clock::now();
  double best = 1.0;
  std::string detail = "final loss by seed:";
  bool improved = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = train_cell(kind, family, layers, comp, seed);
    const double final_loss = r.run.records.back().mean_loss;
    double best_so_far = r.run.records.front().mean_loss;
    for (const auto& rec : r.run.records) best_so_far = std::min(best_so_far, rec.mean_loss);
    improved = improved && best_so_far < r.run.records.front().mean_loss;
    best = std::min(best, final_loss);
    detail += " " + fmt(final_loss);
  }
  const double secs = seconds_since(t0);
  detail += "; best " + fmt(best) + " (<= " + fmt(threshold, 2) + "), " + fmt(secs, 1) + " s";
  if (!improved) detail += "; a seed never improved on epoch 1";
  return {best <= threshold && improved && secs < time_budget, detail};
}

// Reduced grid shared by the spread, trend and timing criteria.
struct ReducedGrid {
  std::map<std::pair<AnsatzFamily, int>, std::vector<double>> fidelities;  // (family, latent)
  std::map<AnsatzFamily, std::vector<double>> epoch_seconds;               // 4->3 only
  double seconds = 0.0;
};

const ReducedGrid& reduced_grid() {
  static const ReducedGrid grid = [] {
    ReducedGrid g;
    const auto t0 = std::chrono::steady_clock::now();
    for (auto family : {AnsatzFamily::Circuit1, AnsatzFamily::Circuit2, AnsatzFamily::Circuit3}) {
      for (int latent : {3, 2, 1}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          const auto r = train_cell(DatasetKind::Framed4x4, family, 3, {4, latent}, seed);
          auto& f = g.fidelities[{family, latent}];
          for (const auto& x : r.fidelities) f.push_back(x.fidelity);
          if (latent == 3) g.epoch_seconds[family].push_back(r.mean_epoch_seconds);
        }
      }
    }
    g.seconds = seconds_since(t0);
    return g;
  }();
  return grid;
}

Outcome fidelity_spread() {
  const auto& g = reduced_grid();
  double lo = 1.0, hi = 0.0;
  for (const auto& [key, f] : g.fidelities) {
    if (key.second == 1) continue;  // spread covers 4->3 and 4->2
    lo = std::min(lo, *std::min_element(f.begin(), f.end()));
    hi = std::max(hi, *std::max_element(f.begin(), f.end()));
  }
  return {hi >= 0.90 && lo >= 0.55,
          "min " + fmt(lo) + " (>= 0.55), max " + fmt(hi) + " (>= 0.90); reduced grid " +
              fmt(g.seconds, 1) + " s"};
}

Outcome compression_trend() {
  const auto& g = reduced_grid();
  bool ok = true;
  std::string detail;
  for (auto family : {AnsatzFamily::Circuit1, AnsatzFamily::Circuit2, AnsatzFamily::Circuit3}) {
    const double m3 = median(g.fidelities.at({family, 3}));
    const double m2 = median(g.fidelities.at({family, 2}));
    const double m1 = median(g.fidelities.at({family, 1}));
    ok = ok && m3 >= m2 && m2 >= m1;
    detail += std::string(family_name(family)) + " " + fmt(m3) + " >= " + fmt(m2) + " >= " +
              fmt(m1) + "; ";
  }
  return {ok, detail + "L=3, seeds 1-3 pooled"};
}

Outcome timing_order() {
  const auto& g = reduced_grid();
  std::map<AnsatzFamily, double> mean;
  for (const auto& [family, v] : g.epoch_seconds) {
    double s = 0.0;
    for (double x : v) s += x;
    mean[family] = s / static_cast<double>(v.size());
  }
  const double c1 = mean[AnsatzFamily::Circuit1], c2 = mean[AnsatzFamily::Circuit2],
               c3 = mean[AnsatzFamily::Circuit3];
  return {c1 < c3 && c3 < c2, "mean epoch ms at L=3: circuit1 " + fmt(c1 * 1e3, 2) +
                                  ", circuit3 " + fmt(c3 * 1e3, 2) + ", circuit2 " +
                                  fmt(c2 * 1e3, 2) + " (want c1 < c3 < c2)"};
}

Outcome shots_vs_exact() {
  std::mt19937_64 rng(3003);
  const auto images = encode_all(framed_4x4_dataset());
  const AnsatzFamily families[] = {AnsatzFamily::Circuit1, AnsatzFamily::Circuit2,
                                   AnsatzFamily::Circuit3};
  double worst_z = 0.0;
  int instances = 0;
  for (int i = 0; i < 90; ++i) {
    auto cfg = qae_config(families[i % 3], 4, 1 + i % 3, 3);
    const QaeModel exact(cfg);
    cfg.eval = {EvalMode::Shots, 8192, 77};
    const QaeModel shots(cfg);
    const auto theta = random_theta(exact.num_params(), rng);
    const auto& img = images[static_cast<std::size_t>(i) % images.size()];
    const double j = exact.cost(theta, img.state).value;
    const double p0 = 1.0 - j / 2.0;
    const double sigma = 2.0 * std::sqrt(std::max(p0 * (1.0 - p0), 1e-12) / 8192.0);
    const double z = std::abs(shots.cost(theta, img.state, static_cast<std::uint64_t>(i)).raw - j) / sigma;
    worst_z = std::max(worst_z, z);
    ++instances;
  }

  // A short bars training run in both modes from the same start.
  const auto split = make_split(bars_and_stripes_2x4(), SplitOptions{10, 2, 5, 2, std::nullopt});
  auto cfg = qae_config(AnsatzFamily::Circuit1Device3q, 3, 2, 3);
  cfg.batch_size = 5;
  cfg.n_iter = 1;
  cfg.epochs = 10;
  cfg.init_seed = 2;
  const auto exact_run = train(split, cfg);
  cfg.eval = {EvalMode::Shots, 8192, 5};
  const auto shot_run = train(split, cfg);
  const double le = exact_run.records.back().mean_loss;
  const double ls = shot_run.records.back().mean_loss_raw;
  // Per-image sd of the estimate is at most 1/sqrt(shots); the epoch mean
  // averages 20 images, and the trajectories themselves differ slightly.
  const double loss_sigma = 1.0 / std::sqrt(8192.0 * 20.0);
  const double loss_z = std::abs(ls - le) / loss_sigma;

  return {worst_z <= 5.0 && loss_z <= 5.0,
          std::to_string(instances) + " costs, max z = " + fmt(worst_z, 2) +
              "; 10-epoch bars loss exact " + fmt(le) + " vs shots " + fmt(ls) + " (z = " +
              fmt(loss_z, 2) + ")"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"resource-counts", resource_grid},
      {"descriptors", descriptor_table},
      {"swap-test-law", swap_test_law},
      {"gradient-check", gradient_check},
      {"job-accounting", job_accounting},
      {"train-bars-3to2",
       [] {
         return best_of_three(DatasetKind::Bars2x4, AnsatzFamily::Circuit1Device3q, 3, {3, 2}, 0.08,
                              300.0);
       }},
      {"train-framed-4to3-circuit3-L7",
       [] {
         return best_of_three(DatasetKind::Framed4x4, AnsatzFamily::Circuit3, 7, {4, 3}, 0.05,
                              1800.0);
       }},
      {"fidelity-spread", fidelity_spread},
      {"compression-trend", compression_trend},
      {"timing-order", timing_order},
      {"shots-vs-exact", shots_vs_exact},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
