#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "cooling.hpp"
#include "rng.hpp"

namespace qcool {

namespace numeric {

/// Composite 20-point Gauss-Legendre over [a, b] with panels of at most `width`.
template <class F>
double panels(F&& f, double a, double b, double width = 1.0) {
  if (!(b > a)) return 0.0;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / width));
  const double w = (b - a) / static_cast<double>(n);
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = a + w * static_cast<double>(i);
    s += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, lo + w);
  }
  return s;
}

/// int_a^inf phi(x) dx for a smooth decaying phi.
template <class F>
double semi_infinite(F&& phi, double a) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double u) { return phi(a + u); });
}

/// int_a^inf phi(x) cos(w x) dx for a smooth, non-oscillating, decaying phi.
template <class F>
double oscillatory_tail(F&& phi, double a, double w) {
  if (std::abs(w) < 1e-9) return semi_infinite(phi, a);
  thread_local boost::math::quadrature::ooura_fourier_cos<double> cos_int;
  thread_local boost::math::quadrature::ooura_fourier_sin<double> sin_int;
  const double aw = std::abs(w);
  auto shifted = [&](double u) { return phi(a + u); };
  const double c = cos_int.integrate(shifted, aw).first;
  const double s = sin_int.integrate(shifted, aw).first * (w < 0 ? -1.0 : 1.0);
  return std::cos(w * a) * c - std::sin(w * a) * s;
}

}  // namespace numeric

/// Quadrature over the dual: int_0^X f(x) cos(hx) dx. Heavy-tailed duals use panels up to 200 and
/// Ooura's method on smooth-times-cosine pieces beyond; for X >= cutoff_L(1e-8) the tail is taken to infinity.
inline double dual_cosine_integral(const CoolingFunction& cf, double h, double X) {
  const double split = 200.0;
  auto integrand = [&](double x) { return cf.f(x) * std::cos(h * x); };
  // Gaussian and sech duals are below 1e-40 past x = 60.
  if (cf.kind() == Kind::gaussian || cf.kind() == Kind::sech) return numeric::panels(integrand, 0.0, std::min(X, 60.0));
  if (X <= split) return numeric::panels(integrand, 0.0, X);
  double s = numeric::panels(integrand, 0.0, split);
  auto inv_sq = [](double x) { return 1.0 / (x * x); };
  switch (cf.kind()) {
    case Kind::exponential: s += numeric::oscillatory_tail([](double x) { return 2.0 / (1.0 + x * x); }, split, h); break;
    case Kind::triangle:
      // sinc^2(x/2) = 2(1 - cos x)/x^2
      s += 2.0 * numeric::oscillatory_tail(inv_sq, split, h) - numeric::oscillatory_tail(inv_sq, split, h + 1.0) -
           numeric::oscillatory_tail(inv_sq, split, h - 1.0);
      break;
    default: break;
  }
  return s;
}

/// Closure check window: cutoff_L(1e-8) + 10.
inline double closure_window(const CoolingFunction& cf) { return cf.cutoff_L(1e-8) + 10.0; }

/// g(h) reconstructed from the dual by quadrature.
inline double reconstruct_g(const CoolingFunction& cf, double h) { return dual_cosine_integral(cf, h, closure_window(cf)) / std::numbers::pi; }

/// ||f|| = int |f| by quadrature (f >= 0 for every kind here).
inline double quadrature_f_norm(const CoolingFunction& cf) { return 2.0 * dual_cosine_integral(cf, 0.0, std::numeric_limits<double>::infinity()); }

/// Mass of p outside [-L, L] by quadrature.
inline double quadrature_tail_mass(const CoolingFunction& cf, double L) {
  double t = 0;
  switch (cf.kind()) {
    case Kind::triangle: {
      auto inv_sq = [](double x) { return 1.0 / (x * x); };
      t = 2.0 * numeric::semi_infinite(inv_sq, L) - 2.0 * numeric::oscillatory_tail(inv_sq, L, 1.0);
      break;
    }
    default: t = numeric::semi_infinite([&](double x) { return cf.f(x); }, L); break;
  }
  return 2.0 * t / cf.f_norm();
}

/// sup |F_emp - F| over sorted samples.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - F), std::abs(F - static_cast<double>(i) / n)});
  }
  return d;
}

/// CDF of y = x - x' by one-dimensional quadrature of the analytic CDF of x:
/// F_y(Y) = 1/2 + int_0^inf p(t)[F(Y + t) + F(Y - t) - 1] dt. The bracket decays like |Y| p(t), so the
/// integrand is O(t^-4) and the range is cut at 200 + |Y|.
inline double difference_cdf(const CoolingFunction& cf, double Y) {
  auto integrand = [&](double t) { return cf.density(t) * (cf.cdf(Y + t) + cf.cdf(Y - t) - 1.0); };
  return 0.5 + numeric::panels(integrand, 0.0, 200.0 + std::abs(Y), 2.0);
}

struct KindReport {
  Kind kind;
  bool realizable = false;
  double closure_max_error = 0;
  double f_norm_quadrature = 0;
  double f_norm_error = 0;
  std::vector<std::pair<double, double>> tails;  // (eps, quadrature tail mass beyond L(eps))
  double ks_x = 0;
  double ks_y = 0;
  double triangle_acceptance = 0;
  bool closure_pass = false, norm_pass = false, tail_pass = false, ks_pass = false;
  bool pass() const { return !realizable || (closure_pass && norm_pass && tail_pass && ks_pass); }
};

inline std::vector<double> draw(const CoolingFunction& cf, std::size_t n, std::uint64_t seed, bool difference) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto rng = keyed_stream(seed, difference ? 0x5b : 0x5a, k);
    v[k] = difference ? cf.sample_y(rng) : cf.sample_x(rng);
  }
  return v;
}

/// KS distance of sample_y draws against the convolved CDF. The CDF is tabulated on a sinh-spaced grid over
/// [-400, 400] and interpolated; outside the grid the distance is bounded by the larger of the two tail masses.
inline double ks_difference(const CoolingFunction& cf, std::size_t n, std::uint64_t seed) {
  std::vector<double> ys = draw(cf, n, seed, true);
  std::sort(ys.begin(), ys.end());
  const double ymax = 400.0, c = 2.0;
  const std::size_t m = 2001;
  const double umax = std::asinh(ymax / c);
  std::vector<double> grid(m), F(m);
  for (std::size_t i = 0; i < m; ++i) {
    grid[i] = c * std::sinh(-umax + 2.0 * umax * static_cast<double>(i) / static_cast<double>(m - 1));
    F[i] = difference_cdf(cf, grid[i]);
  }
  auto cdf = [&](double y) {
    const double pos = (std::asinh(y / c) + umax) / (2.0 * umax) * static_cast<double>(m - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), m - 2);
    const double t = pos - static_cast<double>(i);
    return (1.0 - t) * F[i] + t * F[i + 1];
  };
  const double nn = static_cast<double>(ys.size());
  double d = 0;
  std::size_t below = 0, above = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] < -ymax) {
      ++below;
      continue;
    }
    if (ys[i] > ymax) {
      ++above;
      continue;
    }
    const double f = cdf(ys[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / nn - f), std::abs(f - static_cast<double>(i) / nn)});
  }
  d = std::max({d, std::max(static_cast<double>(below) / nn, F.front()), std::max(static_cast<double>(above) / nn, 1.0 - F.back())});
  return d;
}

inline KindReport validate_kind(const CoolingFunction& cf, std::uint64_t seed, std::size_t draws = 100000) {
  KindReport r;
  r.kind = cf.kind();
  r.realizable = cf.realizable();
  if (!r.realizable) return r;
  for (int k = -50; k <= 50; ++k) {
    const double h = 0.1 * k;
    r.closure_max_error = std::max(r.closure_max_error, std::abs(cf.g(h) - reconstruct_g(cf, h)));
  }
  r.closure_pass = r.closure_max_error <= 1e-4;
  r.f_norm_quadrature = quadrature_f_norm(cf);
  r.f_norm_error = std::abs(r.f_norm_quadrature - cf.f_norm());
  r.norm_pass = r.f_norm_error <= 1e-6;
  r.tail_pass = true;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double t = quadrature_tail_mass(cf, cf.cutoff_L(eps));
    r.tails.emplace_back(eps, t);
    r.tail_pass = r.tail_pass && t <= eps * (1.0 + 1e-9);
  }
  auto& stats = triangle_rejection_stats();
  stats.reset();
  r.ks_x = ks_statistic(draw(cf, draws, seed, false), [&](double x) { return cf.cdf(x); });
  if (cf.kind() == Kind::triangle) r.triangle_acceptance = stats.acceptance_rate();
  r.ks_y = ks_difference(cf, draws, seed);
  r.ks_pass = r.ks_x < 0.01 && r.ks_y < 0.01;
  return r;
}

inline std::vector<KindReport> validate_functions(std::uint64_t seed, std::size_t draws = 100000) {
  std::vector<KindReport> out;
  for (Kind k : all_kinds) out.push_back(validate_kind(CoolingFunction(k), seed, draws));
  return out;
}

}  // namespace qcool
