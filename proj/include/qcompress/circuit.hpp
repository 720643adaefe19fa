#pragma once

// Gate-level circuit representation, exact statevector execution, shot
// sampling and resource counting.
//
// Rotations use the half-angle convention R_P(theta) = exp(-i theta P / 2).
// Controlled kinds act on their target only when the control bit is 1.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qcompress/core.hpp"
#include "qcompress/random.hpp"

namespace qcompress {

enum class GateKind { H, X, RX, RY, RZ, CNOT, CZ, CRZ, CRX, SWAP, CSWAP };

inline constexpr std::array<std::pair<GateKind, std::string_view>, 11> kGateNames{{
    {GateKind::H, "H"},
    {GateKind::X, "X"},
    {GateKind::RX, "RX"},
    {GateKind::RY, "RY"},
    {GateKind::RZ, "RZ"},
    {GateKind::CNOT, "CNOT"},
    {GateKind::CZ, "CZ"},
    {GateKind::CRZ, "CRZ"},
    {GateKind::CRX, "CRX"},
    {GateKind::SWAP, "SWAP"},
    {GateKind::CSWAP, "CSWAP"},
}};

inline std::string_view gate_name(GateKind kind) {
  for (const auto& [k, name] : kGateNames) {
    if (k == kind) return name;
  }
  throw std::logic_error("unknown gate kind");
}

inline std::optional<GateKind> parse_gate_kind(std::string_view name) {
  for (const auto& [k, n] : kGateNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

constexpr bool is_parameterized(GateKind k) {
  return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ || k == GateKind::CRZ ||
         k == GateKind::CRX;
}

constexpr bool is_controlled(GateKind k) {
  return k == GateKind::CNOT || k == GateKind::CZ || k == GateKind::CRZ || k == GateKind::CRX ||
         k == GateKind::CSWAP;
}

constexpr std::size_t target_count(GateKind k) {
  return (k == GateKind::SWAP || k == GateKind::CSWAP) ? 2 : 1;
}

constexpr bool is_multi_qubit(GateKind k) { return is_controlled(k) || k == GateKind::SWAP; }

struct GateOp {
  GateKind kind;
  std::vector<int> targets;
  std::optional<int> control;
  std::optional<int> param_slot;
  // Rotation angle is -theta[slot]; set by adjoint().
  bool negated = false;

  /// Control (if any) followed by targets.
  std::vector<int> qubits() const {
    std::vector<int> q;
    if (control) q.push_back(*control);
    q.insert(q.end(), targets.begin(), targets.end());
    return q;
  }

  bool operator==(const GateOp&) const = default;
};

class Circuit {
 public:
  Circuit(int num_qubits, int num_params, std::vector<GateOp> ops = {})
      : num_qubits_(num_qubits), num_params_(num_params), ops_(std::move(ops)) {
    detail::check_qubit_count(num_qubits_);
    if (num_params_ < 0) throw std::domain_error("negative parameter count");
    std::vector<bool> used(static_cast<std::size_t>(num_params_), false);
    for (const auto& op : ops_) {
      validate(op);
      if (op.param_slot) {
        if (used[static_cast<std::size_t>(*op.param_slot)]) {
          throw std::domain_error("parameter slot " + std::to_string(*op.param_slot) +
                                  " referenced twice");
        }
        used[static_cast<std::size_t>(*op.param_slot)] = true;
      }
    }
  }

  int num_qubits() const { return num_qubits_; }
  int num_params() const { return num_params_; }
  const std::vector<GateOp>& ops() const { return ops_; }

  bool operator==(const Circuit&) const = default;

 private:
  void validate(const GateOp& op) const {
    const auto name = std::string(gate_name(op.kind));
    if (op.targets.size() != target_count(op.kind)) {
      throw std::domain_error(name + ": wrong number of targets");
    }
    if (op.control.has_value() != is_controlled(op.kind)) {
      throw std::domain_error(name + ": control qubit presence mismatch");
    }
    if (op.param_slot.has_value() != is_parameterized(op.kind)) {
      throw std::domain_error(name + ": parameter slot presence mismatch");
    }
    if (op.negated && !is_parameterized(op.kind)) {
      throw std::domain_error(name + ": only rotations can be negated");
    }
    if (op.param_slot && (*op.param_slot < 0 || *op.param_slot >= num_params_)) {
      throw std::out_of_range(name + ": parameter slot out of range");
    }
    auto qs = op.qubits();
    for (int q : qs) {
      if (q < 0 || q >= num_qubits_) throw std::out_of_range(name + ": qubit index out of range");
    }
    std::sort(qs.begin(), qs.end());
    if (std::adjacent_find(qs.begin(), qs.end()) != qs.end()) {
      throw std::domain_error(name + ": repeated qubit");
    }
  }

  int num_qubits_;
  int num_params_;
  std::vector<GateOp> ops_;
};

/// Appends gates, handing out a fresh parameter slot to every rotation.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(int num_qubits) : num_qubits_(num_qubits) {}

  CircuitBuilder& h(int q) { return fixed(GateKind::H, {q}); }
  CircuitBuilder& x(int q) { return fixed(GateKind::X, {q}); }
  CircuitBuilder& rx(int q) { return rotation(GateKind::RX, q); }
  CircuitBuilder& ry(int q) { return rotation(GateKind::RY, q); }
  CircuitBuilder& rz(int q) { return rotation(GateKind::RZ, q); }
  CircuitBuilder& cnot(int c, int t) { return fixed(GateKind::CNOT, {t}, c); }
  CircuitBuilder& cz(int c, int t) { return fixed(GateKind::CZ, {t}, c); }
  CircuitBuilder& swap(int a, int b) { return fixed(GateKind::SWAP, {a, b}); }
  CircuitBuilder& cswap(int c, int a, int b) { return fixed(GateKind::CSWAP, {a, b}, c); }
  CircuitBuilder& crz(int c, int t) { return rotation(GateKind::CRZ, t, c); }
  CircuitBuilder& crx(int c, int t) { return rotation(GateKind::CRX, t, c); }

  CircuitBuilder& rotation(GateKind kind, int target, std::optional<int> control = std::nullopt) {
    ops_.push_back(GateOp{kind, {target}, control, next_slot_++, false});
    return *this;
  }

  Circuit build() const { return Circuit(num_qubits_, next_slot_, ops_); }

 private:
  CircuitBuilder& fixed(GateKind kind, std::vector<int> targets,
                        std::optional<int> control = std::nullopt) {
    ops_.push_back(GateOp{kind, std::move(targets), control, std::nullopt, false});
    return *this;
  }

  int num_qubits_;
  int next_slot_ = 0;
  std::vector<GateOp> ops_;
};

namespace detail {

using Mat2 = std::array<complex_t, 4>;  // row-major

inline Mat2 rotation_matrix(GateKind kind, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  switch (kind) {
    case GateKind::RX:
    case GateKind::CRX:
      return {c, complex_t(0, -s), complex_t(0, -s), c};
    case GateKind::RY:
      return {c, -s, s, c};
    case GateKind::RZ:
    case GateKind::CRZ:
      return {complex_t(c, -s), 0.0, 0.0, complex_t(c, s)};
    default:
      throw std::logic_error("not a rotation");
  }
}

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Applies a 2x2 matrix to `target`, restricted to indices where all bits of
// `control_mask` are set.
inline void apply_mat2(complex_t* v, std::size_t dim, int target, std::size_t control_mask,
                       const Mat2& m) {
  const std::size_t tmask = std::size_t{1} << target;
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & tmask) || (i & control_mask) != control_mask) continue;
    const complex_t a = v[i];
    const complex_t b = v[i | tmask];
    v[i] = m[0] * a + m[1] * b;
    v[i | tmask] = m[2] * a + m[3] * b;
  }
}

inline void apply_swap(complex_t* v, std::size_t dim, int qa, int qb, std::size_t control_mask) {
  const std::size_t ma = std::size_t{1} << qa;
  const std::size_t mb = std::size_t{1} << qb;
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & ma) && !(i & mb) && (i & control_mask) == control_mask) {
      std::swap(v[i], v[(i & ~ma) | mb]);
    }
  }
}

inline void apply_op(const GateOp& op, std::span<const double> theta, complex_t* v,
                     std::size_t dim) {
  const std::size_t cmask = op.control ? (std::size_t{1} << *op.control) : 0;
  const int t = op.targets[0];
  switch (op.kind) {
    case GateKind::H:
      apply_mat2(v, dim, t, 0, {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2});
      break;
    case GateKind::X:
    case GateKind::CNOT: {
      const std::size_t tmask = std::size_t{1} << t;
      for (std::size_t i = 0; i < dim; ++i) {
        if (!(i & tmask) && (i & cmask) == cmask) std::swap(v[i], v[i | tmask]);
      }
      break;
    }
    case GateKind::CZ: {
      const std::size_t both = cmask | (std::size_t{1} << t);
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & both) == both) v[i] = -v[i];
      }
      break;
    }
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::CRX:
    case GateKind::CRZ: {
      const double angle = theta[static_cast<std::size_t>(*op.param_slot)];
      apply_mat2(v, dim, t, cmask, rotation_matrix(op.kind, op.negated ? -angle : angle));
      break;
    }
    case GateKind::SWAP:
    case GateKind::CSWAP:
      apply_swap(v, dim, op.targets[0], op.targets[1], cmask);
      break;
  }
}

inline void check_theta(const Circuit& circuit, std::span<const double> theta) {
  if (theta.size() != static_cast<std::size_t>(circuit.num_params())) {
    throw std::domain_error("expected " + std::to_string(circuit.num_params()) +
                            " parameters, got " + std::to_string(theta.size()));
  }
}

/// Runs the circuit in place on raw amplitudes; no validation.
inline void run_inplace(const Circuit& circuit, std::span<const double> theta,
                        Eigen::VectorXcd& amps) {
  const auto dim = static_cast<std::size_t>(amps.size());
  for (const auto& op : circuit.ops()) apply_op(op, theta, amps.data(), dim);
}

}  // namespace detail

inline StateVector apply(const Circuit& circuit, std::span<const double> theta,
                         const StateVector& input) {
  detail::check_theta(circuit, theta);
  if (input.num_qubits() != circuit.num_qubits()) {
    throw std::domain_error("state has " + std::to_string(input.num_qubits()) +
                            " qubits, circuit expects " + std::to_string(circuit.num_qubits()));
  }
  Eigen::VectorXcd amps = input.amplitudes();
  detail::run_inplace(circuit, theta, amps);
  return StateVector::normalized(std::move(amps));
}

/// U rho U^dagger.
inline DensityMatrix apply_to_density(const Circuit& circuit, std::span<const double> theta,
                                      const DensityMatrix& rho) {
  detail::check_theta(circuit, theta);
  if (rho.num_qubits() != circuit.num_qubits()) {
    throw std::domain_error("density matrix qubit count does not match circuit");
  }
  const auto apply_columns = [&](Eigen::MatrixXcd m) {
    const auto dim = static_cast<std::size_t>(m.rows());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (const auto& op : circuit.ops()) detail::apply_op(op, theta, m.col(c).data(), dim);
    }
    return m;
  };
  // U (U rho)^dagger = U rho U^dagger for Hermitian rho.
  Eigen::MatrixXcd half = apply_columns(rho.matrix());
  Eigen::MatrixXcd out = apply_columns(half.adjoint());
  out = 0.5 * (out + out.adjoint());
  detail::debug_check_density(out);
  return DensityMatrix::unchecked(std::move(out));
}

/// U^dagger: reversed order, rotations negated, parameter slots kept.
inline Circuit adjoint(const Circuit& circuit) {
  std::vector<GateOp> ops(circuit.ops().rbegin(), circuit.ops().rend());
  for (auto& op : ops) {
    if (is_parameterized(op.kind)) op.negated = !op.negated;
  }
  return Circuit(circuit.num_qubits(), circuit.num_params(), std::move(ops));
}

/// Probability that `qubit` reads 1.
inline double probability_one(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.num_qubits()) throw std::out_of_range("qubit out of range");
  const std::size_t mask = std::size_t{1} << qubit;
  double p = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    if (i & mask) p += std::norm(state[i]);
  }
  return std::clamp(p, 0.0, 1.0);
}

struct MeasurementCounts {
  long count0 = 0;
  long count1 = 0;
  bool operator==(const MeasurementCounts&) const = default;
};

/// Binomial draw from the exact marginal of one qubit.
inline MeasurementCounts measure_qubit(const StateVector& state, int qubit, long shots,
                                       std::uint64_t seed) {
  if (shots < 1) throw std::domain_error("shots must be >= 1");
  const double p1 = probability_one(state, qubit);
  auto rng = make_stream(seed);
  std::binomial_distribution<long> dist(shots, p1);
  const long ones = dist(rng);
  return {shots - ones, ones};
}

struct ResourceCount {
  int num_params = 0;
  int two_qubit_gates = 0;
  int depth = 0;
  bool operator==(const ResourceCount&) const = default;
};

inline ResourceCount resource_count(const Circuit& circuit) {
  ResourceCount rc;
  rc.num_params = circuit.num_params();
  std::vector<int> layer(static_cast<std::size_t>(circuit.num_qubits()), 0);
  for (const auto& op : circuit.ops()) {
    if (is_multi_qubit(op.kind)) ++rc.two_qubit_gates;
    const auto qs = op.qubits();
    int l = 0;
    for (int q : qs) l = std::max(l, layer[static_cast<std::size_t>(q)]);
    for (int q : qs) layer[static_cast<std::size_t>(q)] = l + 1;
    rc.depth = std::max(rc.depth, l + 1);
  }
  return rc;
}

// Text format: header `qubits=n params=p`, then one gate per line as
// `KIND q0[,q1[,q2]] [slot=k] [neg]` with the control qubit listed first.
inline std::string to_text(const Circuit& circuit) {
  std::ostringstream os;
  os << "qubits=" << circuit.num_qubits() << " params=" << circuit.num_params() << '\n';
  for (const auto& op : circuit.ops()) {
    os << gate_name(op.kind) << ' ';
    const auto qs = op.qubits();
    for (std::size_t i = 0; i < qs.size(); ++i) os << (i ? "," : "") << qs[i];
    if (op.param_slot) os << " slot=" << *op.param_slot;
    if (op.negated) os << " neg";
    os << '\n';
  }
  return os.str();
}

namespace detail {

inline int parse_int(std::string_view s, int line_no) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::domain_error("circuit line " + std::to_string(line_no) + ": bad integer '" +
                            std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline Circuit parse_circuit(std::string_view text) {
  auto lines = detail::split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw std::domain_error("circuit text is empty");

  const auto header = detail::split(lines[0], ' ');
  if (header.size() != 2 || !header[0].starts_with("qubits=") || !header[1].starts_with("params=")) {
    throw std::domain_error("circuit line 1: expected 'qubits=n params=p'");
  }
  const int n = detail::parse_int(header[0].substr(7), 1);
  const int p = detail::parse_int(header[1].substr(7), 1);

  std::vector<GateOp> ops;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    const auto fields = detail::split(lines[li], ' ');
    const auto err = [&](const std::string& msg) {
      return std::domain_error("circuit line " + std::to_string(line_no) + ": " + msg);
    };
    if (fields.size() < 2) throw err("expected 'KIND qubits'");
    const auto kind = parse_gate_kind(fields[0]);
    if (!kind) throw err("unknown gate '" + std::string(fields[0]) + "'");

    std::vector<int> qs;
    for (auto q : detail::split(fields[1], ',')) qs.push_back(detail::parse_int(q, line_no));

    GateOp op{*kind, {}, std::nullopt, std::nullopt, false};
    const std::size_t expected = target_count(*kind) + (is_controlled(*kind) ? 1 : 0);
    if (qs.size() != expected) throw err("wrong number of qubits");
    if (is_controlled(*kind)) {
      op.control = qs.front();
      op.targets.assign(qs.begin() + 1, qs.end());
    } else {
      op.targets = qs;
    }
    std::size_t fi = 2;
    if (fi < fields.size() && fields[fi].starts_with("slot=")) {
      op.param_slot = detail::parse_int(fields[fi].substr(5), line_no);
      ++fi;
    }
    if (fi < fields.size() && fields[fi] == "neg") {
      op.negated = true;
      ++fi;
    }
    if (fi != fields.size()) throw err("unexpected trailing field");
    ops.push_back(std::move(op));
  }
  return Circuit(n, p, std::move(ops));
}

}  // namespace qcompress
