#pragma once

// Dense state vectors and density matrices for small registers.
//
// Basis-state labels are little-endian: qubit 0 is the least-significant bit
// of the basis index. Every other module maps its own labels onto this one.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qcompress {

using complex_t = std::complex<double>;

inline constexpr int kMaxQubits = 12;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
// Eigenvalues in [-kEigenClamp, 0) are rounding noise and clamp to zero.
inline constexpr double kEigenClamp = 1e-9;

namespace detail {

inline void check_qubit_count(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::domain_error("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                            "], got " + std::to_string(num_qubits));
  }
}

inline int qubits_for_dimension(std::size_t dim) {
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw std::domain_error("dimension " + std::to_string(dim) + " is not a power of two >= 2");
  }
  const int n = std::countr_zero(dim);
  check_qubit_count(n);
  return n;
}

// Spreads the bits of `compact` into the positions listed in `positions`.
inline std::uint64_t scatter_bits(std::uint64_t compact, const std::vector<int>& positions) {
  std::uint64_t out = 0;
  for (std::size_t b = 0; b < positions.size(); ++b) {
    out |= ((compact >> b) & 1u) << positions[b];
  }
  return out;
}

}  // namespace detail

/// Ordered, duplicate-free set of qubit positions.
class QubitSubset {
 public:
  QubitSubset(std::initializer_list<int> indices) : QubitSubset(std::vector<int>(indices)) {}

  explicit QubitSubset(std::vector<int> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) throw std::domain_error("qubit subset must be non-empty");
    std::sort(indices_.begin(), indices_.end());
    if (indices_.front() < 0) throw std::out_of_range("negative qubit index in subset");
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
      throw std::domain_error("qubit subset has duplicate indices");
    }
  }

  /// The `count` highest-index qubits of an n-qubit register.
  static QubitSubset highest(int num_qubits, int count) {
    if (count < 1 || count > num_qubits) throw std::domain_error("invalid highest-qubit count");
    std::vector<int> idx;
    for (int q = num_qubits - count; q < num_qubits; ++q) idx.push_back(q);
    return QubitSubset(std::move(idx));
  }

  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool contains(int q) const { return std::binary_search(indices_.begin(), indices_.end(), q); }

  void check_within(int num_qubits) const {
    if (indices_.back() >= num_qubits) {
      throw std::out_of_range("qubit " + std::to_string(indices_.back()) +
                              " outside register of " + std::to_string(num_qubits));
    }
  }

  /// Qubits of an n-qubit register not in this subset, ascending.
  std::vector<int> complement(int num_qubits) const {
    std::vector<int> out;
    for (int q = 0; q < num_qubits; ++q) {
      if (!contains(q)) out.push_back(q);
    }
    return out;
  }

  bool operator==(const QubitSubset&) const = default;

 private:
  std::vector<int> indices_;
};

class StateVector {
 public:
  /// |0...0> on `num_qubits` qubits.
  explicit StateVector(int num_qubits) : StateVector(basis(num_qubits, 0)) {}

  static StateVector basis(int num_qubits, std::uint64_t index) {
    detail::check_qubit_count(num_qubits);
    const std::size_t dim = std::size_t{1} << num_qubits;
    if (index >= dim) throw std::out_of_range("basis index out of range");
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    amps(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(amps), num_qubits);
  }

  /// Wraps amplitudes that must already be normalized within 1e-10.
  static StateVector from_amplitudes(Eigen::VectorXcd amps) {
    const int n = detail::qubits_for_dimension(static_cast<std::size_t>(amps.size()));
    if (std::abs(amps.squaredNorm() - 1.0) > kNormTolerance) {
      throw std::domain_error("state vector is not normalized");
    }
    return StateVector(std::move(amps), n);
  }

  static StateVector normalized(Eigen::VectorXcd amps) {
    const int n = detail::qubits_for_dimension(static_cast<std::size_t>(amps.size()));
    const double norm = amps.norm();
    if (norm == 0.0) throw std::domain_error("cannot normalize the zero vector");
    amps /= norm;
    return StateVector(std::move(amps), n);
  }

  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  complex_t operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

  /// |this> on the low qubits, |high> on the qubits above them.
  StateVector tensor(const StateVector& high) const {
    Eigen::VectorXcd out(static_cast<Eigen::Index>(dimension() * high.dimension()));
    const auto low_dim = amps_.size();
    for (Eigen::Index h = 0; h < high.amps_.size(); ++h) {
      out.segment(h * low_dim, low_dim) = high.amps_(h) * amps_;
    }
    return StateVector(std::move(out), num_qubits_ + high.num_qubits_);
  }

 private:
  StateVector(Eigen::VectorXcd amps, int n) : num_qubits_(n), amps_(std::move(amps)) {}

  int num_qubits_;
  Eigen::VectorXcd amps_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positive semidefiniteness.
  static DensityMatrix from_matrix(Eigen::MatrixXcd m) {
    if (m.rows() != m.cols()) throw std::domain_error("density matrix must be square");
    const int n = detail::qubits_for_dimension(static_cast<std::size_t>(m.rows()));
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance) {
      throw std::domain_error("density matrix is not Hermitian");
    }
    if (std::abs(m.trace() - complex_t{1.0}) > kTraceTolerance) {
      throw std::domain_error("density matrix trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kEigenClamp) {
      throw std::domain_error("density matrix is not positive semidefinite");
    }
    return DensityMatrix(std::move(m), n);
  }

  static DensityMatrix maximally_mixed(int num_qubits) {
    detail::check_qubit_count(num_qubits);
    const auto dim = Eigen::Index{1} << num_qubits;
    return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim),
                         num_qubits);
  }

  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  complex_t operator()(std::size_t r, std::size_t c) const {
    return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  /// this on the low qubits, `high` on the qubits above them.
  DensityMatrix tensor(const DensityMatrix& high) const {
    return DensityMatrix(kroneckerProduct(high.m_), num_qubits_ + high.num_qubits_);
  }

  /// For results of trace- and Hermiticity-preserving maps on valid inputs.
  static DensityMatrix unchecked(Eigen::MatrixXcd m) {
    const int n = detail::qubits_for_dimension(static_cast<std::size_t>(m.rows()));
    return DensityMatrix(std::move(m), n);
  }

 private:
  DensityMatrix(Eigen::MatrixXcd m, int n) : num_qubits_(n), m_(std::move(m)) {}

  Eigen::MatrixXcd kroneckerProduct(const Eigen::MatrixXcd& high) const {
    const auto d = m_.rows();
    Eigen::MatrixXcd out(d * high.rows(), d * high.cols());
    for (Eigen::Index r = 0; r < high.rows(); ++r) {
      for (Eigen::Index c = 0; c < high.cols(); ++c) {
        out.block(r * d, c * d, d, d) = high(r, c) * m_;
      }
    }
    return out;
  }

  int num_qubits_;
  Eigen::MatrixXcd m_;
};

inline DensityMatrix pure_density(const StateVector& state) {
  const auto& a = state.amplitudes();
  return DensityMatrix::unchecked(a * a.adjoint());
}

namespace detail {

inline void debug_check_density(const Eigen::MatrixXcd& m) {
#ifndef NDEBUG
  assert((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-8);
  assert(std::abs(m.trace() - complex_t{1.0}) <= 1e-8);
#else
  (void)m;
#endif
}

inline void check_trace_subset(int num_qubits, const QubitSubset& traced_out) {
  traced_out.check_within(num_qubits);
  if (static_cast<int>(traced_out.size()) >= num_qubits) {
    throw std::domain_error("partial trace must leave at least one qubit");
  }
}

// Hermitian square root with near-zero negative eigenvalues clamped.
inline Eigen::VectorXd clamped_eigenvalues(const Eigen::VectorXd& values) {
  Eigen::VectorXd out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < -kEigenClamp) {
      throw std::domain_error("matrix has a negative eigenvalue " + std::to_string(out(i)));
    }
    out(i) = std::max(out(i), 0.0);
  }
  return out;
}

inline Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::VectorXd roots = clamped_eigenvalues(es.eigenvalues()).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Traces out `traced_out`; remaining qubits keep their relative order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const QubitSubset& traced_out) {
  const int n = rho.num_qubits();
  detail::check_trace_subset(n, traced_out);
  const std::vector<int> kept = traced_out.complement(n);
  const std::size_t kept_dim = std::size_t{1} << kept.size();
  const std::size_t traced_dim = std::size_t{1} << traced_out.size();

  std::vector<std::uint64_t> kept_idx(kept_dim), traced_idx(traced_dim);
  for (std::size_t i = 0; i < kept_dim; ++i) kept_idx[i] = detail::scatter_bits(i, kept);
  for (std::size_t k = 0; k < traced_dim; ++k) {
    traced_idx[k] = detail::scatter_bits(k, traced_out.indices());
  }

  const auto& m = rho.matrix();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(kept_dim),
                                                static_cast<Eigen::Index>(kept_dim));
  for (std::size_t i = 0; i < kept_dim; ++i) {
    for (std::size_t j = 0; j < kept_dim; ++j) {
      complex_t acc{0.0};
      for (std::size_t k = 0; k < traced_dim; ++k) {
        acc += m(static_cast<Eigen::Index>(kept_idx[i] | traced_idx[k]),
                 static_cast<Eigen::Index>(kept_idx[j] | traced_idx[k]));
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  detail::debug_check_density(out);
  return DensityMatrix::unchecked(std::move(out));
}

/// Partial trace of |state><state| without forming the full density matrix.
inline DensityMatrix reduced_density(const StateVector& state, const QubitSubset& traced_out) {
  const int n = state.num_qubits();
  detail::check_trace_subset(n, traced_out);
  const std::vector<int> kept = traced_out.complement(n);
  const auto kept_dim = Eigen::Index{1} << kept.size();
  const auto traced_dim = Eigen::Index{1} << traced_out.size();

  // Rows: kept basis index; columns: traced basis index.
  Eigen::MatrixXcd psi(kept_dim, traced_dim);
  for (Eigen::Index i = 0; i < kept_dim; ++i) {
    const auto ki = detail::scatter_bits(static_cast<std::uint64_t>(i), kept);
    for (Eigen::Index k = 0; k < traced_dim; ++k) {
      const auto tk = detail::scatter_bits(static_cast<std::uint64_t>(k), traced_out.indices());
      psi(i, k) = state.amplitudes()(static_cast<Eigen::Index>(ki | tk));
    }
  }
  Eigen::MatrixXcd out = psi * psi.adjoint();
  detail::debug_check_density(out);
  return DensityMatrix::unchecked(std::move(out));
}

inline double purity(const DensityMatrix& rho) { return rho.matrix().cwiseAbs2().sum(); }

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1].
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dimension() != sigma.dimension()) {
    throw std::domain_error("fidelity: dimension mismatch");
  }
  const Eigen::MatrixXcd root = detail::hermitian_sqrt(rho.matrix());
  Eigen::MatrixXcd inner = root * sigma.matrix() * root;
  inner = 0.5 * (inner + inner.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
  const double f = detail::clamped_eigenvalues(es.eigenvalues()).cwiseSqrt().sum();
  return std::clamp(f, 0.0, 1.0);
}

/// Fidelity against a pure state: sqrt(<phi|sigma|phi>).
inline double fidelity(const StateVector& phi, const DensityMatrix& sigma) {
  if (phi.dimension() != sigma.dimension()) {
    throw std::domain_error("fidelity: dimension mismatch");
  }
  const double expectation =
      (phi.amplitudes().adjoint() * sigma.matrix() * phi.amplitudes())(0, 0).real();
  return std::clamp(std::sqrt(std::max(expectation, 0.0)), 0.0, 1.0);
}

/// |<a|b>|^2
inline double state_overlap(const StateVector& a, const StateVector& b) {
  if (a.dimension() != b.dimension()) throw std::domain_error("overlap: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

// Row-major nested arrays of [re, im] pairs.
inline nlohmann::json to_json(const DensityMatrix& rho) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < rho.dimension(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < rho.dimension(); ++c) {
      row.push_back({rho(r, c).real(), rho(r, c).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline DensityMatrix density_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) throw std::domain_error("density JSON must be an array");
  const auto dim = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto& row = rows.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw std::domain_error("density JSON row has wrong length");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& e = row.at(static_cast<std::size_t>(c));
      m(r, c) = complex_t(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return DensityMatrix::from_matrix(std::move(m));
}

}  // namespace qcompress
