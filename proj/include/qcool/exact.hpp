#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cooling.hpp"
#include "errors.hpp"
#include "pauli.hpp"

namespace qcool {

class StateVector {
 public:
  StateVector() = default;

  /// Normalizes; rejects zero or non power-of-two length.
  explicit StateVector(cvec amps) : amps_(std::move(amps)) {
    const Eigen::Index dim = amps_.size();
    while ((Eigen::Index{1} << n_) < dim) ++n_;
    if (dim < 2 || (Eigen::Index{1} << n_) != dim) throw dimension_error("state length must be 2^n with n >= 1");
    const double nrm = amps_.norm();
    if (!(nrm > 1e-300) || !std::isfinite(nrm)) throw domain_error("state has zero norm");
    amps_ /= nrm;
  }

  int qubits() const { return n_; }
  Eigen::Index dim() const { return amps_.size(); }
  const cvec& amplitudes() const { return amps_; }
  cplx operator[](Eigen::Index i) const { return amps_[i]; }

 private:
  cvec amps_;
  int n_ = 0;
};

/// Projector onto eigenvector `index` of the attached eigensystem.
struct EigenProjector {
  std::size_t index = 0;
};

using Observable = std::variant<PauliSum, EigenProjector>;

/// Spectrum of a Hermitian matrix with an attached initial state. Energies are stored shifted to be nonnegative.
class EigenSystem {
 public:
  static constexpr double hermitian_tol = 1e-10;
  static constexpr double degeneracy_tol = 1e-9;
  static constexpr double support_tol = 1e-20;  // overlaps below this are dropped from the autocorrelation

  EigenSystem(const cmat& h, const StateVector& psi0) : psi0_(psi0) {
    if (h.rows() != h.cols() || h.rows() != psi0.dim()) throw dimension_error("hamiltonian and state dimensions differ");
    const double asym = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (asym > hermitian_tol) throw domain_error("matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
    Eigen::SelfAdjointEigenSolver<cmat> solver(h);
    if (solver.info() != Eigen::Success) throw error("eigensolver failed");
    raw_energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    align_degenerate_clusters();
    shift_ = std::max(0.0, -raw_energies_[0]);
    energies_ = raw_energies_.array() + shift_;
    coeffs_ = vectors_.adjoint() * psi0_.amplitudes();
    overlaps_ = coeffs_.cwiseAbs2();
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (overlaps_[i] > support_tol) support_.push_back(i);
  }

  Eigen::Index dim() const { return energies_.size(); }
  int qubits() const { return psi0_.qubits(); }
  double shift() const { return shift_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::VectorXd& original_energies() const { return raw_energies_; }
  double energy(Eigen::Index i) const { return energies_[i]; }
  double to_original(double e_shifted) const { return e_shifted - shift_; }
  double to_shifted(double e_original) const { return e_original + shift_; }
  const cmat& vectors() const { return vectors_; }
  const cvec& coefficients() const { return coeffs_; }
  const Eigen::VectorXd& overlaps() const { return overlaps_; }
  double overlap(Eigen::Index i) const { return overlaps_[i]; }
  const StateVector& initial_state() const { return psi0_; }

  /// Index of the eigenvector with the largest overlap.
  Eigen::Index largest_overlap_index() const {
    Eigen::Index j = 0;
    overlaps_.maxCoeff(&j);
    return j;
  }

  /// Smallest |E_i - E_j| over i != j with p_i > pmin.
  double effective_gap(Eigen::Index j, double pmin = 1e-12) const {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (i != j && overlaps_[i] > pmin) gap = std::min(gap, std::abs(energies_[i] - energies_[j]));
    return gap;
  }

  /// Eigenbasis coefficients of e^{itH}|psi0>.
  cvec evolved_coefficients(double t) const {
    cvec a(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) a[i] = std::polar(1.0, t * energies_[i]) * coeffs_[i];
    return a;
  }

  cvec to_computational(const cvec& eig_coeffs) const { return vectors_ * eig_coeffs; }

  /// Eigen indices with p_i > support_tol.
  const std::vector<Eigen::Index>& support() const { return support_; }

  /// <psi0| e^{itH} |psi0> = sum_i p_i e^{itE_i}.
  cplx autocorrelation(double t) const {
    double re = 0, im = 0;
    for (Eigen::Index i : support_) {
      const double ph = t * energies_[i];
      re += overlaps_[i] * std::cos(ph);
      im += overlaps_[i] * std::sin(ph);
    }
    return {re, im};
  }

 private:
  // Rotate each degenerate eigenspace so psi0's component lies on its first vector.
  void align_degenerate_clusters() {
    const Eigen::Index n = raw_energies_.size();
    Eigen::Index start = 0;
    while (start < n) {
      Eigen::Index end = start + 1;
      while (end < n && raw_energies_[end] - raw_energies_[end - 1] <= degeneracy_tol * std::max(1.0, std::abs(raw_energies_[end]))) ++end;
      const Eigen::Index k = end - start;
      if (k > 1) {
        auto block = vectors_.middleCols(start, k);
        cvec w = block.adjoint() * psi0_.amplitudes();
        if (w.norm() > 1e-14) {
          Eigen::HouseholderQR<cmat> qr{cmat(w)};
          cmat q = qr.householderQ();
          cmat rotated = block * q;
          block = rotated;
        }
      }
      start = end;
    }
  }

  StateVector psi0_;
  Eigen::VectorXd raw_energies_;
  Eigen::VectorXd energies_;
  cmat vectors_;
  cvec coeffs_;
  Eigen::VectorXd overlaps_;
  std::vector<Eigen::Index> support_;
  double shift_ = 0.0;
};

inline EigenSystem eigendecompose(const PauliSum& h, const StateVector& psi0) {
  if (h.qubits() != psi0.qubits()) throw dimension_error("hamiltonian has " + std::to_string(h.qubits()) + " qubits, state has " + std::to_string(psi0.qubits()));
  return EigenSystem(sum_to_matrix(h).matrix, psi0);
}

inline StateVector evolve(const EigenSystem& es, const StateVector& psi, double t) {
  if (psi.dim() != es.dim()) throw dimension_error("state dimension differs from eigensystem");
  cvec a = es.vectors().adjoint() * psi.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] *= std::polar(1.0, t * es.energy(i));
  return StateVector(es.vectors() * a);
}

/// O applied to a computational-basis vector.
inline cvec apply_observable(const EigenSystem& es, const Observable& o, const cvec& v) {
  if (const auto* s = std::get_if<PauliSum>(&o)) {
    if (s->qubits() != es.qubits()) throw dimension_error("observable qubit count differs from hamiltonian");
    return s->apply(v);
  }
  const auto j = static_cast<Eigen::Index>(std::get<EigenProjector>(o).index);
  if (j >= es.dim()) throw dimension_error("projector index out of range");
  auto u = es.vectors().col(j);
  return u * (u.adjoint() * v)(0, 0);
}

/// <b|O|a> where a, b are eigenbasis coefficient vectors.
inline cplx observable_sandwich(const EigenSystem& es, const Observable& o, const cvec& a, const cvec& b) {
  if (const auto* pr = std::get_if<EigenProjector>(&o)) {
    const auto j = static_cast<Eigen::Index>(pr->index);
    if (j >= es.dim()) throw dimension_error("projector index out of range");
    return std::conj(b[j]) * a[j];
  }
  const cvec va = es.to_computational(a);
  const cvec vb = es.to_computational(b);
  return vb.dot(apply_observable(es, o, va));
}

inline double observable_one_norm(const Observable& o) {
  if (const auto* s = std::get_if<PauliSum>(&o)) return s->one_norm();
  return 1.0;
}

/// Pauli expansion of a projector observable, for shot-mode sampling.
inline PauliSum observable_as_pauli_sum(const EigenSystem& es, const Observable& o) {
  if (const auto* s = std::get_if<PauliSum>(&o)) return *s;
  const auto j = static_cast<Eigen::Index>(std::get<EigenProjector>(o).index);
  auto u = es.vectors().col(j);
  return pauli_decompose(u * u.adjoint());
}

/// <psi0| e^{-ix'tau H} P e^{ix tau H} |psi0>.
inline cplx matrix_element(const EigenSystem& es, double x_prime, const PauliString& p, double x, double tau) {
  if (p.qubits() != es.qubits()) throw dimension_error("pauli string qubit count differs from hamiltonian");
  const cvec a = es.to_computational(es.evolved_coefficients(x * tau));
  const cvec b = es.to_computational(es.evolved_coefficients(x_prime * tau));
  return b.dot(p.apply(a));
}

/// <psi0| e^{iy tau H} |psi0>.
inline cplx matrix_element(const EigenSystem& es, double y, double tau) { return es.autocorrelation(y * tau); }

/// D = sum_i p_i g(tau(E_i - E))^2, E in the shifted frame.
inline double exact_D(const EigenSystem& es, const CoolingFunction& cf, double tau, double e) {
  double d = 0;
  for (Eigen::Index i = 0; i < es.dim(); ++i) {
    const double gi = cf.g(tau * (es.energy(i) - e));
    d += es.overlap(i) * gi * gi;
  }
  return d;
}

inline cvec filtered_coefficients(const EigenSystem& es, const CoolingFunction& cf, double tau, double e) {
  cvec v(es.dim());
  for (Eigen::Index i = 0; i < es.dim(); ++i) v[i] = cf.g(tau * (es.energy(i) - e)) * es.coefficients()[i];
  return v;
}

/// N = <v|O|v> with v = g(tau(H - E))|psi0>.
inline double exact_N(const EigenSystem& es, const CoolingFunction& cf, double tau, double e, const Observable& o) {
  const cvec v = filtered_coefficients(es, cf, tau, e);
  return observable_sandwich(es, o, v, v).real();
}

struct CooledState {
  StateVector state;
  Eigen::VectorXd weights;  // |<u_i|psi(tau)>|^2

  double infidelity_to(Eigen::Index j) const { return 1.0 - weights[j]; }
};

inline CooledState cooled_state(const EigenSystem& es, const CoolingFunction& cf, double tau, double e) {
  const cvec v = filtered_coefficients(es, cf, tau, e);
  const double nrm = v.norm();
  if (!(nrm > 1e-14)) throw domain_error("cooled state norm below 1e-14: g annihilates every overlapped eigenstate");
  return CooledState{StateVector(es.to_computational(v)), v.cwiseAbs2() / (nrm * nrm)};
}

}  // namespace qcool
