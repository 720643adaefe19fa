#pragma once

// Builders for the three layered ansatz families and the 3-qubit device
// variant. Resource counts under resource_count() (n qubits, L layers):
//
//   circuit1        params n(L+1)    two-qubit nL       depth (n+1)L+1
//   circuit2        params 4(n-1)L   two-qubit (n-1)L   depth 6L  (n >= 3)
//   circuit3        params 3nL       two-qubit nL       depth (n+3)L
//   circuit1-dev3q  params 3(L+1)    two-qubit 2L       depth 3L+1
//
// circuit2 on two qubits has no middle qubits for its second rotation block,
// so its depth there is 3L.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qcompress/circuit.hpp"
#include "qcompress/random.hpp"

namespace qcompress {

enum class AnsatzFamily { Circuit1, Circuit2, Circuit3, Circuit1Device3q };

inline std::string_view family_name(AnsatzFamily f) {
  switch (f) {
    case AnsatzFamily::Circuit1: return "circuit1";
    case AnsatzFamily::Circuit2: return "circuit2";
    case AnsatzFamily::Circuit3: return "circuit3";
    case AnsatzFamily::Circuit1Device3q: return "circuit1-dev3q";
  }
  throw std::logic_error("unknown ansatz family");
}

inline std::optional<AnsatzFamily> parse_family(std::string_view name) {
  for (auto f : {AnsatzFamily::Circuit1, AnsatzFamily::Circuit2, AnsatzFamily::Circuit3,
                 AnsatzFamily::Circuit1Device3q}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

struct AnsatzSpec {
  AnsatzFamily family = AnsatzFamily::Circuit1;
  int num_qubits = 4;
  int layers = 3;

  void validate() const {
    if (num_qubits < 2 || num_qubits > kMaxQubits) {
      throw std::domain_error("ansatz needs between 2 and " + std::to_string(kMaxQubits) +
                              " qubits");
    }
    if (layers < 1) throw std::domain_error("ansatz needs at least one layer");
    if (family == AnsatzFamily::Circuit1Device3q && num_qubits != 3) {
      throw std::domain_error("circuit1-dev3q is defined on exactly 3 qubits");
    }
  }

  bool operator==(const AnsatzSpec&) const = default;
};

namespace detail {

inline void rotate_all(CircuitBuilder& b, GateKind kind, int first, int last) {
  for (int q = first; q < last; ++q) b.rotation(kind, q);
}

// CNOT cascade 0->1, 1->2, ..., (n-1)->0.
inline void cnot_ring(CircuitBuilder& b, int n) {
  for (int q = 0; q < n; ++q) b.cnot(q, (q + 1) % n);
}

}  // namespace detail

inline Circuit build(const AnsatzSpec& spec) {
  spec.validate();
  const int n = spec.num_qubits;
  CircuitBuilder b(n);
  switch (spec.family) {
    case AnsatzFamily::Circuit1:
      detail::rotate_all(b, GateKind::RY, 0, n);
      for (int l = 0; l < spec.layers; ++l) {
        detail::cnot_ring(b, n);
        detail::rotate_all(b, GateKind::RY, 0, n);
      }
      break;
    case AnsatzFamily::Circuit1Device3q:
      // Linear CNOT chain; the ring's closing CNOT needs connectivity the
      // 3-qubit device line does not have.
      detail::rotate_all(b, GateKind::RY, 0, n);
      for (int l = 0; l < spec.layers; ++l) {
        b.cnot(0, 1).cnot(1, 2);
        detail::rotate_all(b, GateKind::RY, 0, n);
      }
      break;
    case AnsatzFamily::Circuit2:
      // Brick pattern: RY/RZ on all qubits, CNOTs on even pairs, RY/RZ on
      // the inner qubits, CNOTs on odd pairs.
      for (int l = 0; l < spec.layers; ++l) {
        detail::rotate_all(b, GateKind::RY, 0, n);
        detail::rotate_all(b, GateKind::RZ, 0, n);
        for (int q = 0; q + 1 < n; q += 2) b.cnot(q, q + 1);
        detail::rotate_all(b, GateKind::RY, 1, n - 1);
        detail::rotate_all(b, GateKind::RZ, 1, n - 1);
        for (int q = 1; q + 1 < n; q += 2) b.cnot(q, q + 1);
      }
      break;
    case AnsatzFamily::Circuit3:
      for (int l = 0; l < spec.layers; ++l) {
        detail::rotate_all(b, GateKind::RX, 0, n);
        detail::rotate_all(b, GateKind::RY, 0, n);
        detail::rotate_all(b, GateKind::RZ, 0, n);
        detail::cnot_ring(b, n);
      }
      break;
  }
  return b.build();
}

/// Closed-form resource counts per family.
inline ResourceCount expected_resources(const AnsatzSpec& spec) {
  spec.validate();
  const int n = spec.num_qubits;
  const int L = spec.layers;
  switch (spec.family) {
    case AnsatzFamily::Circuit1: return {n * (L + 1), n * L, (n + 1) * L + 1};
    case AnsatzFamily::Circuit2: return {4 * (n - 1) * L, (n - 1) * L, 6 * L};
    case AnsatzFamily::Circuit3: return {3 * n * L, n * L, (n + 3) * L};
    case AnsatzFamily::Circuit1Device3q: return {3 * (L + 1), 2 * L, 3 * L + 1};
  }
  throw std::logic_error("unknown ansatz family");
}

/// Training initialization: i.i.d. uniform on [0, 2pi).
inline std::vector<double> initial_parameters(const Circuit& circuit, std::uint64_t seed) {
  auto rng = make_stream(seed, 0x1a17);
  return uniform_angles(static_cast<std::size_t>(circuit.num_params()), rng);
}

}  // namespace qcompress
