#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "cooling.hpp"
#include "exact.hpp"
#include "rng.hpp"

namespace qcool {

enum class Mode { shot, expectation };

inline std::string_view mode_name(Mode m) { return m == Mode::shot ? "shot" : "expectation"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "shot") return Mode::shot;
  if (s == "expectation") return Mode::expectation;
  throw config_error("unknown mode '" + std::string(s) + "' (expected shot|expectation)");
}

/// Either e^{iy tau H} or e^{-ix' tau H} P_l e^{ix tau H}.
struct UnitarySpec {
  enum class Type { evolution, sandwich } type = Type::evolution;
  double y = 0;
  double x = 0;
  double x_prime = 0;
  double tau = 0;
  const PauliString* pauli = nullptr;

  static UnitarySpec evolution(double y, double tau) { return {Type::evolution, y, 0, 0, tau, nullptr}; }
  static UnitarySpec sandwich(double x_prime, const PauliString& p, double x, double tau) { return {Type::sandwich, 0, x, x_prime, tau, &p}; }
};

/// <psi0|U|psi0> from the exact engine.
inline cplx unitary_value(const EigenSystem& es, const UnitarySpec& u) {
  if (u.type == UnitarySpec::Type::evolution) return es.autocorrelation(u.y * u.tau);
  return matrix_element(es, u.x_prime, *u.pauli, u.x, u.tau);
}

/// Ancilla outcome for a known overlap v: Pr(a=0) = (1 + Re v)/2 for b=0, (1 + Im v)/2 for b=1.
inline int hadamard_outcome(cplx v, int b, rng_t& rng) {
  if (std::abs(v) > 1.0 + 1e-9) throw error("hadamard test overlap has modulus " + std::to_string(std::abs(v)) + " > 1");
  const double p0 = 0.5 * (1.0 + (b == 0 ? v.real() : v.imag()));
  return uniform01(rng) < p0 ? 0 : 1;
}

inline int hadamard_shot(const EigenSystem& es, const UnitarySpec& u, int b, rng_t& rng) { return hadamard_outcome(unitary_value(es, u), b, rng); }

/// r = 2 i^b (-1)^a.
inline cplx estimator_r(int b, int a) {
  const double s = a ? -2.0 : 2.0;
  return b ? cplx(0, s) : cplx(s, 0);
}

struct ShotRecord {
  enum class Type { D, N } type = Type::D;
  double t1 = 0;  // y for D-shots, x for N-shots
  double t2 = 0;  // x' for N-shots
  std::optional<std::size_t> pauli_index;
  int b = 0;
  int a = 0;
  bool truncated = false;
  cplx raw_r = 0;  // 2 i^b (-1)^a; exact overlap in expectation mode; 0 if truncated

  double y() const { return type == Type::D ? t1 : t1 - t2; }
};

/// One D-shot. The E-dependent estimate is raw_r * e^{-i tau y E}.
inline ShotRecord d_shot(const EigenSystem& es, const CoolingFunction& cf, double tau, double x_m, rng_t& rng, Mode mode = Mode::shot) {
  ShotRecord r;
  r.type = ShotRecord::Type::D;
  r.t1 = cf.sample_y(rng);
  if (!(std::abs(r.t1) <= x_m)) {
    r.truncated = true;
    return r;
  }
  const cplx v = es.autocorrelation(r.t1 * tau);
  if (mode == Mode::expectation) {
    r.raw_r = v;
    return r;
  }
  r.b = random_bit(rng);
  r.a = hadamard_outcome(v, r.b, rng);
  r.raw_r = estimator_r(r.b, r.a);
  return r;
}

inline cplx d_value(const ShotRecord& r, double tau, double e) { return r.truncated ? cplx(0) : r.raw_r * std::polar(1.0, -tau * r.t1 * e); }

/// One N-shot. Shot mode samples l ~ Pr_O; expectation mode uses the whole observable and no Pauli sampling.
/// The estimate is scale * raw_r * e^{-i tau (x - x') E}, scale = ||O||_1 in shot mode.
inline ShotRecord n_shot(const EigenSystem& es, const CoolingFunction& cf, double tau, double x_m, const Observable& o, rng_t& rng, Mode mode = Mode::shot) {
  ShotRecord r;
  r.type = ShotRecord::Type::N;
  r.t1 = cf.sample_x(rng);
  r.t2 = cf.sample_x(rng);
  if (mode == Mode::shot) {
    const auto* s = std::get_if<PauliSum>(&o);
    if (!s) throw domain_error("shot-mode n_shot needs a pauli-sum observable");
    if (s->empty()) throw domain_error("empty observable");
    r.pauli_index = s->sample(rng);
  }
  if (!(std::abs(r.t1) <= x_m && std::abs(r.t2) <= x_m)) {
    r.truncated = true;
    return r;
  }
  if (mode == Mode::expectation) {
    if (const auto* pr = std::get_if<EigenProjector>(&o)) {
      const auto j = static_cast<Eigen::Index>(pr->index);
      if (j >= es.dim()) throw dimension_error("projector index out of range");
      r.raw_r = es.overlap(j) * std::polar(1.0, tau * (r.t1 - r.t2) * es.energy(j));
      return r;
    }
    r.raw_r = observable_sandwich(es, o, es.evolved_coefficients(r.t1 * tau), es.evolved_coefficients(r.t2 * tau));
    return r;
  }
  const cvec a = es.evolved_coefficients(r.t1 * tau);
  const cvec b = es.evolved_coefficients(r.t2 * tau);
  const auto& s = std::get<PauliSum>(o);
  const PauliString& p = s[*r.pauli_index].op;
  const cplx v = es.to_computational(b).dot(p.apply(es.to_computational(a)));
  r.b = random_bit(rng);
  r.a = hadamard_outcome(v, r.b, rng);
  r.raw_r = estimator_r(r.b, r.a);
  return r;
}

inline cplx n_value(const ShotRecord& r, double tau, double e, double scale) {
  return r.truncated ? cplx(0) : scale * r.raw_r * std::polar(1.0, -tau * (r.t1 - r.t2) * e);
}

}  // namespace qcool
