#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>

#include <gsl/gsl_sf_expint.h>

#include "errors.hpp"
#include "rng.hpp"

namespace qcool {

enum class Kind { rectangular, triangle, exponential, gaussian, sech };

inline constexpr std::array<Kind, 5> all_kinds = {Kind::rectangular, Kind::triangle, Kind::exponential, Kind::gaussian, Kind::sech};
inline constexpr std::array<Kind, 4> realizable_kinds = {Kind::triangle, Kind::exponential, Kind::gaussian, Kind::sech};

inline std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::rectangular: return "rectangular";
    case Kind::triangle: return "triangle";
    case Kind::exponential: return "exponential";
    case Kind::gaussian: return "gaussian";
    case Kind::sech: return "sech";
  }
  return "?";
}

inline Kind parse_kind(std::string_view s) {
  for (Kind k : all_kinds)
    if (kind_name(k) == s) return k;
  throw config_error("unknown cooling function kind '" + std::string(s) + "'");
}

namespace detail {

// sin(u)/u
inline double sinc(double u) {
  if (std::abs(u) < 1e-4) return 1.0 - u * u / 6.0;
  return std::sin(u) / u;
}

inline double sech(double x) {
  const double a = std::abs(x);
  if (a > 700) return 0.0;
  const double e = std::exp(-a);
  return 2.0 * e / (1.0 + e * e);
}

}  // namespace detail

/// Triangle rejection-sampler counters, shared process-wide.
struct RejectionStats {
  std::atomic<std::uint64_t> proposals{0};
  std::atomic<std::uint64_t> accepted{0};
  double acceptance_rate() const {
    const auto p = proposals.load();
    return p ? static_cast<double>(accepted.load()) / static_cast<double>(p) : 0.0;
  }
  void reset() {
    proposals = 0;
    accepted = 0;
  }
};

inline RejectionStats& triangle_rejection_stats() {
  static RejectionStats s;
  return s;
}

/// A cooling function g(h) and its nonnegative dual f(x), g(h) = (1/2pi) int f(x) e^{ixh} dx.
class CoolingFunction {
 public:
  // Triangle sampler envelope: Lorentzian of scale 2, p <= M q.
  static constexpr double triangle_envelope_scale = 2.0;
  static constexpr double triangle_envelope_M = 2.0;

  CoolingFunction() = default;
  explicit CoolingFunction(Kind k) : kind_(k) {}

  Kind kind() const { return kind_; }
  std::string_view name() const { return kind_name(kind_); }
  bool realizable() const { return kind_ != Kind::rectangular; }

  /// ||f|| = int |f|; infinite for the rectangular kind.
  double f_norm() const {
    using std::numbers::pi;
    return realizable() ? 2.0 * pi : std::numeric_limits<double>::infinity();
  }

  double c() const { return f_norm() / (2.0 * std::numbers::pi); }

  double g(double h) const {
    const double a = std::abs(h);
    switch (kind_) {
      case Kind::rectangular: return a <= 0.5 ? 1.0 : 0.0;
      case Kind::triangle: return a <= 1.0 ? 1.0 - a : 0.0;
      case Kind::exponential: return std::exp(-a);
      case Kind::gaussian: return std::exp(-h * h);
      case Kind::sech: return detail::sech(h);
    }
    return 0.0;
  }

  double f(double x) const {
    using std::numbers::pi;
    switch (kind_) {
      case Kind::rectangular: return detail::sinc(x / 2.0);
      case Kind::triangle: {
        const double s = detail::sinc(x / 2.0);
        return s * s;
      }
      case Kind::exponential: return 2.0 / (x * x + 1.0);
      case Kind::gaussian: return std::sqrt(pi) * std::exp(-x * x / 4.0);
      case Kind::sech: return pi * detail::sech(pi * x / 2.0);
    }
    return 0.0;
  }

  /// p(x) = f(x)/||f||.
  double density(double x) const {
    require_realizable("density_p");
    return f(x) / f_norm();
  }

  /// Frequency cutoff with tail mass <= eps outside [-L, L].
  double cutoff_L(double eps) const {
    require_realizable("cutoff_L");
    if (!(eps > 0.0 && eps < 1.0)) throw domain_error("cutoff_L needs eps in (0,1)");
    using std::numbers::pi;
    switch (kind_) {
      case Kind::triangle: return 6.0 / eps;
      case Kind::exponential: return 2.0 / (pi * eps);
      case Kind::gaussian: return 2.0 * std::sqrt(std::log(1.0 / eps));
      case Kind::sech: return 2.0 / pi * std::log(4.0 / (pi * eps));
      default: break;
    }
    return 0.0;
  }

  /// Inverse of cutoff_L: the tail-mass bound guaranteed at cutoff x, capped at 1.
  double tail_bound(double x) const {
    require_realizable("tail_bound");
    if (!(x > 0.0)) return 1.0;
    using std::numbers::pi;
    double t = 1.0;
    switch (kind_) {
      case Kind::triangle: t = 6.0 / x; break;
      case Kind::exponential: t = 2.0 / (pi * x); break;
      case Kind::gaussian: t = std::exp(-x * x / 4.0); break;
      case Kind::sech: t = 4.0 / pi * std::exp(-pi * x / 2.0); break;
      default: break;
    }
    return std::min(1.0, t);
  }

  /// Exact mass of p outside [-x, x].
  double tail_mass(double x) const {
    require_realizable("tail_mass");
    const double a = std::abs(x);
    return 2.0 * (1.0 - cdf(a));
  }

  double cdf(double x) const {
    require_realizable("cdf");
    using std::numbers::pi;
    switch (kind_) {
      case Kind::triangle: {
        if (x == 0.0) return 0.5;
        const double a = std::abs(x);
        const double s = std::sin(a / 2.0);
        const double half = (gsl_sf_Si(a) - 2.0 * s * s / a) / pi;
        return x > 0 ? 0.5 + half : 0.5 - half;
      }
      case Kind::exponential: return 0.5 + std::atan(x) / pi;
      case Kind::gaussian: return 0.5 * std::erfc(-x / 2.0);
      case Kind::sech: {
        if (x > 0) return 1.0 - 2.0 / pi * std::atan(std::exp(-pi * x / 2.0));
        return 2.0 / pi * std::atan(std::exp(pi * x / 2.0));
      }
      default: break;
    }
    return 0.0;
  }

  /// Smallest h >= 0 with g(h) <= p (Sech: the upper bound ln(2/p)).
  double g_inverse(double p) const {
    require_realizable("g_inverse");
    if (!(p > 0.0 && p <= 1.0)) throw domain_error("g_inverse needs p in (0,1]");
    switch (kind_) {
      case Kind::triangle: return 1.0 - p;
      case Kind::exponential: return std::log(1.0 / p);
      case Kind::gaussian: return std::sqrt(std::log(1.0 / p));
      case Kind::sech: return std::log(2.0 / p);
      default: break;
    }
    return 0.0;
  }

  double sample_x(rng_t& rng) const {
    require_realizable("sample_x");
    using std::numbers::pi;
    switch (kind_) {
      case Kind::exponential: return std::tan(pi * (uniform_open(rng) - 0.5));
      case Kind::gaussian: return std::numbers::sqrt2 * std::normal_distribution<double>(0.0, 1.0)(rng);
      case Kind::sech: return 2.0 / pi * std::log(std::tan(pi * uniform_open(rng) / 2.0));
      case Kind::triangle: {
        auto& stats = triangle_rejection_stats();
        constexpr double s = triangle_envelope_scale;
        for (;;) {
          const double x = s * std::tan(pi * (uniform_open(rng) - 0.5));
          const double q = s / (pi * (s * s + x * x));
          const double u = uniform01(rng);
          stats.proposals.fetch_add(1, std::memory_order_relaxed);
          if (u * triangle_envelope_M * q <= density(x)) {
            stats.accepted.fetch_add(1, std::memory_order_relaxed);
            return x;
          }
        }
      }
      default: break;
    }
    return 0.0;
  }

  /// y = x - x' with x, x' independent draws of p.
  double sample_y(rng_t& rng) const {
    const double x = sample_x(rng);
    return x - sample_x(rng);
  }

 private:
  void require_realizable(const char* op) const {
    if (!realizable())
      throw non_realizable_error(std::string(op) + ": rectangular is not a realizable cooling function (its dual has infinite one-norm)");
  }

  Kind kind_ = Kind::gaussian;
};

}  // namespace qcool
