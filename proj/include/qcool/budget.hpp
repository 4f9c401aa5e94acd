#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "cooling.hpp"
#include "errors.hpp"

namespace qcool {

struct Budget {
  enum class Target { observable, energy } target = Target::observable;
  double tau = 0;
  double x_m = 0;
  double t_m = 0;
  double N_M = 0;  // real-valued bound; round up to draw shots
  double K = 0;
  double delta = 0;
  // observable target: eps, p_j, gap. energy target: kappa, p_j.
  double eps = 0;
  double kappa = 0;
  double p_j = 0;
  double gap = 0;
  bool loose = false;

  std::uint64_t shots() const { return static_cast<std::uint64_t>(std::ceil(N_M - 1e-9)); }
};

namespace detail {

inline void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw domain_error(std::string(what) + " must lie in (0,1)");
}

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw domain_error(std::string(what) + " must be positive");
}

}  // namespace detail

inline double failure_probability(double K) { return 4.0 * std::exp(-K / 8.0); }

/// |<O>est - <O>| <= eps(||O||_1 + 1) with probability >= 1 - 4e^{-K/8}.
/// loose=true uses the main-text constant eps p_j / 6 inside g^{-1}.
inline Budget budget_for_observable(const CoolingFunction& cf, double eps, double p_j, double gap, double K, bool loose = false) {
  detail::require_open_unit(eps, "eps");
  detail::require_open_unit(p_j, "p_j");
  detail::require_positive(gap, "gap");
  detail::require_positive(K, "K");
  if (!cf.realizable()) throw non_realizable_error("rectangular is not a realizable cooling function");
  const double a = eps * p_j / (loose ? 6.0 : 12.0);
  Budget b;
  b.target = Budget::Target::observable;
  b.tau = cf.g_inverse(a) / gap;
  b.x_m = std::numbers::sqrt2 * cf.cutoff_L(eps * p_j / 12.0);
  b.t_m = b.tau * b.x_m;
  const double r = 6.0 / (eps * p_j);
  b.N_M = K * r * r;
  b.K = K;
  b.delta = failure_probability(K);
  b.eps = eps;
  b.p_j = p_j;
  b.gap = gap;
  b.loose = loose;
  return b;
}

/// |E_est - E_j| <= kappa with probability >= 1 - 4e^{-K/8}.
/// loose=true uses the main-text variant: tau = 1/kappa, L((1-g(1))p_j/4), N_M = 2K/((1-g(1))p_j^2).
inline Budget budget_for_energy(const CoolingFunction& cf, double kappa, double p_j, double K, bool loose = false) {
  detail::require_positive(kappa, "kappa");
  detail::require_open_unit(p_j, "p_j");
  detail::require_positive(K, "K");
  if (!cf.realizable()) throw non_realizable_error("rectangular is not a realizable cooling function");
  const double one_minus_g1 = 1.0 - cf.g(1.0);
  const double a = one_minus_g1 * p_j / (loose ? 4.0 : 6.0);
  Budget b;
  b.target = Budget::Target::energy;
  b.tau = loose ? 1.0 / kappa : cf.g_inverse(a) / kappa;
  b.x_m = std::numbers::sqrt2 * cf.cutoff_L(a);
  b.t_m = b.tau * b.x_m;
  b.N_M = loose ? 2.0 * K / (one_minus_g1 * p_j * p_j) : 9.0 * K / (one_minus_g1 * one_minus_g1 * p_j * p_j);
  b.K = K;
  b.delta = failure_probability(K);
  b.kappa = kappa;
  b.p_j = p_j;
  b.loose = loose;
  return b;
}

/// Admissible energy error before the observable guarantee degrades: gap / g^{-1}(eps p_j / 6).
inline double kappa_tolerance(const CoolingFunction& cf, double eps, double p_j, double gap) {
  detail::require_open_unit(eps, "eps");
  detail::require_open_unit(p_j, "p_j");
  detail::require_positive(gap, "gap");
  return gap / cf.g_inverse(eps * p_j / 6.0);
}

/// g(tau kappa)^{-2}: growth of N and D when the filter is centred kappa away from E_j.
inline double kappa_inflation(const CoolingFunction& cf, double tau, double kappa) {
  const double g = cf.g(tau * kappa);
  if (!(g > 0)) throw domain_error("g(tau kappa) vanishes");
  return 1.0 / (g * g);
}

struct ErrorTriple {
  double eps_tau;
  double eps_x;
  double eps_n;
};

struct ResourceErrors {
  ErrorTriple D_at_eigenvalue;  // E = E_j
  ErrorTriple D_window;         // |E - E_j| <= gap/2
  ErrorTriple N;
};

inline ResourceErrors error_from_resources(const CoolingFunction& cf, double tau, double x_m, double n_m, double K, double gap) {
  detail::require_positive(tau, "tau");
  detail::require_positive(x_m, "x_m");
  detail::require_positive(n_m, "N_M");
  detail::require_positive(K, "K");
  detail::require_positive(gap, "gap");
  const double en = std::sqrt(K / n_m);
  const double ex_d = 2.0 * cf.tail_bound(x_m / std::numbers::sqrt2);
  const double ex_n = 2.0 * cf.tail_bound(x_m);
  ResourceErrors r;
  r.D_at_eigenvalue = {2.0 * cf.g(tau * gap), ex_d, en};
  r.D_window = {2.0 * cf.g(tau * gap / 2.0), ex_d, en};
  r.N = {2.0 * cf.g(tau * gap), ex_n, en};
  return r;
}

/// Combined bound [(||O||_1 + 1)(D-side sum) + ||O||_1 (N-side sum)] / p_j, using <O> <= ||O||_1 and ||O||_inf <= ||O||_1.
inline double combined_observable_error(const ResourceErrors& r, double p_j, double o_norm) {
  const auto& d = r.D_at_eigenvalue;
  const double e1 = d.eps_tau + d.eps_x + d.eps_n;
  const double e2 = r.N.eps_tau + r.N.eps_x + r.N.eps_n;
  return ((o_norm + 1.0) * e1 + o_norm * e2) / p_j;
}

}  // namespace qcool
