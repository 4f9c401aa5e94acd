#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include "errors.hpp"
#include "exact.hpp"
#include "pauli.hpp"
#include "rng.hpp"

namespace qcool {

/// J sum (XX + YY + aniso ZZ) + h sum Z over nearest neighbours; periodic adds the (n-1, 0) bond.
inline PauliSum heisenberg(int n, double J, double zz_anisotropy, double h, bool periodic) {
  if (n < 2) throw domain_error("heisenberg needs n >= 2");
  if (!std::isfinite(J) || !std::isfinite(zz_anisotropy) || !std::isfinite(h)) throw domain_error("heisenberg parameters must be finite");
  PauliSum s(n);
  const int bonds = periodic && n > 2 ? n : n - 1;
  for (int b = 0; b < bonds; ++b) {
    const int i = b, j = (b + 1) % n;
    for (char c : {'X', 'Y', 'Z'}) {
      std::string w(static_cast<std::size_t>(n), 'I');
      w[static_cast<std::size_t>(i)] = c;
      w[static_cast<std::size_t>(j)] = c;
      s.add(c == 'Z' ? J * zz_anisotropy : J, w);
    }
  }
  for (int i = 0; i < n; ++i) {
    std::string w(static_cast<std::size_t>(n), 'I');
    w[static_cast<std::size_t>(i)] = 'Z';
    s.add(h, w);
  }
  return s;
}

/// Computational basis state. Character q is qubit q (most significant bit); '1' is the -1 eigenstate of Z.
inline StateVector basis_state(const std::string& bits) {
  if (bits.empty() || static_cast<int>(bits.size()) > max_qubits) throw domain_error("bitstring length must be in [1, " + std::to_string(max_qubits) + "]");
  std::uint64_t idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw domain_error(std::string("non-binary character '") + c + "' in bitstring");
    idx = (idx << 1) | static_cast<std::uint64_t>(c - '0');
  }
  cvec v = cvec::Zero(Eigen::Index{1} << bits.size());
  v[static_cast<Eigen::Index>(idx)] = 1.0;
  return StateVector(v);
}

inline StateVector basis_state(const std::string& bits, int n) {
  if (static_cast<int>(bits.size()) != n) throw domain_error("bitstring has length " + std::to_string(bits.size()) + ", expected " + std::to_string(n));
  return basis_state(bits);
}

/// m distinct non-identity Pauli strings, coefficients uniform in (0,1], random signs.
inline PauliSum random_pauli_hamiltonian(int n, std::size_t m, std::uint64_t seed) {
  if (n < 1 || n > max_qubits) throw domain_error("qubit count out of range");
  if (m < 1) throw domain_error("term count must be >= 1");
  const double available = std::pow(4.0, n) - 1.0;
  if (static_cast<double>(m) > available) throw domain_error("term count exceeds 4^n - 1");
  auto rng = keyed_stream(seed, 0x7a11, 0);
  std::uniform_int_distribution<int> letter(0, 3);
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  std::set<std::string> seen;
  PauliSum s(n);
  while (s.size() < m) {
    std::string w(static_cast<std::size_t>(n), 'I');
    for (auto& c : w) c = letters[letter(rng)];
    if (w == std::string(static_cast<std::size_t>(n), 'I') || !seen.insert(w).second) continue;
    const double coef = 1.0 - uniform01(rng);
    const int sign = random_bit(rng) ? -1 : 1;
    s.add(coef, PauliString(w, sign));
  }
  return s;
}

inline PauliSum load_pauli_file(const std::string& path, int expected_qubits = 0) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open pauli file '" + path + "'");
  return parse_pauli_sum(in, expected_qubits);
}

}  // namespace qcool
