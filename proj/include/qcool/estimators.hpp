#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <thread>
#include <vector>

#include "cooling.hpp"
#include "exact.hpp"
#include "hadamard.hpp"
#include "rng.hpp"

namespace qcool {

namespace stream {
inline constexpr std::uint64_t d_shots = 1;
inline constexpr std::uint64_t n_shots = 2;
}  // namespace stream

/// Worker count for shot batches; 0 means hardware concurrency.
inline unsigned& shot_threads() {
  static unsigned n = 0;
  return n;
}

/// Runs fn(k) for k in [0, count) across threads. Results must be written per index.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  unsigned workers = shot_threads() ? shot_threads() : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, count / 256)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < count; k += workers) fn(k);
    });
  for (auto& t : pool) t.join();
}

struct RunEcho {
  Kind kind = Kind::gaussian;
  double tau = 0;
  double x_m = 0;
  std::size_t N_M = 0;
  double E = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::shot;
};

struct EstimateResult {
  double value = 0;
  std::size_t shots_used = 0;
  std::size_t truncated_count = 0;
  double standard_error = 0;
  double c2 = 1;  // (||f||/2pi)^2, dropped from the estimator
  RunEcho echo;
};

inline double standard_error(double scale, std::size_t n) { return 2.0 * scale / std::sqrt(static_cast<double>(n)); }

/// N_M D-shots drawn once; any trial energy is a classical reweighting.
class DShotBatch {
 public:
  DShotBatch(const EigenSystem& es, const CoolingFunction& cf, double tau, double x_m, std::size_t n, std::uint64_t seed, Mode mode)
      : cf_(cf), tau_(tau), x_m_(x_m), n_(n), seed_(seed), mode_(mode) {
    if (n == 0) throw domain_error("N_M must be >= 1");
    if (!cf.realizable()) throw non_realizable_error("rectangular is not a realizable cooling function");
    std::vector<ShotRecord> all(n);
    parallel_for(n, [&](std::size_t k) {
      auto rng = keyed_stream(seed, stream::d_shots, k);
      all[k] = d_shot(es, cf, tau, x_m, rng, mode);
    });
    for (const auto& r : all) {
      if (r.truncated) {
        ++truncated_;
        continue;
      }
      ty_.push_back(tau * r.t1);
      re_.push_back(r.raw_r.real());
      im_.push_back(r.raw_r.imag());
    }
  }

  /// Re (1/N_M) sum_p raw_r_p e^{-i tau y_p E}.
  double d_hat(double e) const {
    double s = 0;
    for (std::size_t p = 0; p < ty_.size(); ++p) {
      const double ph = ty_[p] * e;
      s += re_[p] * std::cos(ph) + im_[p] * std::sin(ph);
    }
    return s / static_cast<double>(n_);
  }

  EstimateResult result(double e) const {
    EstimateResult r;
    r.value = d_hat(e);
    r.shots_used = n_;
    r.truncated_count = truncated_;
    r.standard_error = standard_error(1.0, n_);
    r.c2 = cf_.c() * cf_.c();
    r.echo = {cf_.kind(), tau_, x_m_, n_, e, seed_, mode_};
    return r;
  }

  std::size_t shots() const { return n_; }
  std::size_t truncated() const { return truncated_; }
  double tau() const { return tau_; }
  double x_m() const { return x_m_; }
  Mode mode() const { return mode_; }
  const CoolingFunction& cooling() const { return cf_; }
  std::uint64_t seed() const { return seed_; }

 private:
  CoolingFunction cf_;
  double tau_, x_m_;
  std::size_t n_;
  std::uint64_t seed_;
  Mode mode_;
  std::size_t truncated_ = 0;
  std::vector<double> ty_, re_, im_;
};

inline EstimateResult estimate_D(const EigenSystem& es, const CoolingFunction& cf, double tau, double x_m, double e, std::size_t n_m, std::uint64_t seed,
                                 Mode mode = Mode::shot) {
  return DShotBatch(es, cf, tau, x_m, n_m, seed, mode).result(e);
}

struct SpectrumCurve {
  std::vector<double> energies;  // shifted frame
  std::vector<double> d_values;
  Mode mode = Mode::shot;
  double c2 = 1;
  std::shared_ptr<const DShotBatch> batch;  // reused for peak refinement
};

/// Uniform grid [lo, hi] with the given spacing, always including both ends.
inline std::vector<double> energy_grid(double lo, double hi, double spacing) {
  if (!(hi > lo) || !(spacing > 0)) throw domain_error("energy grid needs hi > lo and spacing > 0");
  const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / spacing - 1e-9));
  std::vector<double> g(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps);
  return g;
}

inline SpectrumCurve scan_energy(const EigenSystem& es, const CoolingFunction& cf, double tau, double x_m, const std::vector<double>& grid, std::size_t n_m,
                                 std::uint64_t seed, Mode mode) {
  if (grid.empty()) throw domain_error("scan grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw domain_error("scan grid must be strictly increasing");
  auto batch = std::make_shared<const DShotBatch>(es, cf, tau, x_m, n_m, seed, mode);
  SpectrumCurve c{grid, std::vector<double>(grid.size()), mode, cf.c() * cf.c(), batch};
  parallel_for(grid.size(), [&](std::size_t i) { c.d_values[i] = batch->d_hat(grid[i]); });
  return c;
}

struct Peak {
  double energy;  // shifted frame
  double d_hat;
};

/// Maximize a unimodal f on [a, b] to within tol.
inline double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Strict local maxima above min_height, merged within min_separation, refined by golden section
/// on the reused shots down to tol (default: grid spacing / 100).
inline std::vector<Peak> find_peaks(const SpectrumCurve& curve, double min_height, double min_separation, double tol = 0) {
  const auto& e = curve.energies;
  const auto& d = curve.d_values;
  std::vector<Peak> raw;
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 ? n > 1 : d[i] > d[i - 1];
    const bool right = i + 1 == n ? n > 1 : d[i] > d[i + 1];
    if (n == 1 ? d[0] >= min_height : (left && right && d[i] >= min_height)) {
      Peak p{e[i], d[i]};
      if (curve.batch && n > 1 && i > 0 && i + 1 < n) {
        const double step = 0.5 * (e[i + 1] - e[i - 1]);
        const double t = tol > 0 ? tol : step / 100.0;
        const auto& b = *curve.batch;
        p.energy = golden_section_max([&](double x) { return b.d_hat(x); }, e[i - 1], e[i + 1], t);
        p.d_hat = b.d_hat(p.energy);
        if (p.d_hat < d[i]) p = {e[i], d[i]};
      }
      raw.push_back(p);
    }
  }
  std::vector<Peak> merged;
  for (const auto& p : raw) {
    if (!merged.empty() && p.energy - merged.back().energy < min_separation) {
      if (p.d_hat > merged.back().d_hat) merged.back() = p;
    } else {
      merged.push_back(p);
    }
  }
  return merged;
}

/// N_M N-shots, reweightable at any trial energy.
class NShotBatch {
 public:
  NShotBatch(const EigenSystem& es, const CoolingFunction& cf, double tau, double x_m, const Observable& o, std::size_t n, std::uint64_t seed, Mode mode)
      : cf_(cf), tau_(tau), x_m_(x_m), n_(n), seed_(seed), mode_(mode) {
    if (n == 0) throw domain_error("N_M must be >= 1");
    if (!cf.realizable()) throw non_realizable_error("rectangular is not a realizable cooling function");
    Observable obs = o;
    if (mode == Mode::shot) obs = observable_as_pauli_sum(es, o);
    one_norm_ = observable_one_norm(obs);
    if (!(one_norm_ > 0)) throw domain_error("empty observable");
    scale_ = mode == Mode::shot ? one_norm_ : 1.0;
    std::vector<ShotRecord> all(n);
    parallel_for(n, [&](std::size_t k) {
      auto rng = keyed_stream(seed, stream::n_shots, k);
      all[k] = n_shot(es, cf, tau, x_m, obs, rng, mode);
    });
    for (const auto& r : all) {
      if (r.truncated) {
        ++truncated_;
        continue;
      }
      ty_.push_back(tau * (r.t1 - r.t2));
      re_.push_back(r.raw_r.real());
      im_.push_back(r.raw_r.imag());
    }
  }

  double n_hat(double e) const {
    double s = 0;
    for (std::size_t p = 0; p < ty_.size(); ++p) {
      const double ph = ty_[p] * e;
      s += re_[p] * std::cos(ph) + im_[p] * std::sin(ph);
    }
    return scale_ * s / static_cast<double>(n_);
  }

  EstimateResult result(double e) const {
    EstimateResult r;
    r.value = n_hat(e);
    r.shots_used = n_;
    r.truncated_count = truncated_;
    r.standard_error = standard_error(one_norm_, n_);
    r.c2 = cf_.c() * cf_.c();
    r.echo = {cf_.kind(), tau_, x_m_, n_, e, seed_, mode_};
    return r;
  }

  double one_norm() const { return one_norm_; }

 private:
  CoolingFunction cf_;
  double tau_, x_m_;
  std::size_t n_;
  std::uint64_t seed_;
  Mode mode_;
  double one_norm_ = 0, scale_ = 1;
  std::size_t truncated_ = 0;
  std::vector<double> ty_, re_, im_;
};

inline EstimateResult estimate_N(const EigenSystem& es, const CoolingFunction& cf, double tau, double x_m, double e, const Observable& o, std::size_t n_m,
                                 std::uint64_t seed, Mode mode = Mode::shot) {
  return NShotBatch(es, cf, tau, x_m, o, n_m, seed, mode).result(e);
}

struct ObservableEstimate {
  double value;  // N/D
  EstimateResult D;
  EstimateResult N;
};

inline double ratio_floor(const EstimateResult& d) { return std::max(3.0 * d.standard_error, 1e-6); }

/// <O> = N/D; D and N come from independent shot streams of the same seed.
inline ObservableEstimate estimate_observable(const EigenSystem& es, const CoolingFunction& cf, double tau, double x_m, double e, const Observable& o,
                                              std::size_t n_m, std::uint64_t seed, Mode mode = Mode::shot) {
  ObservableEstimate r{0, estimate_D(es, cf, tau, x_m, e, n_m, seed, mode), estimate_N(es, cf, tau, x_m, e, o, n_m, seed, mode)};
  const double floor = ratio_floor(r.D);
  if (r.D.value < floor)
    throw degenerate_estimate_error("D estimate " + std::to_string(r.D.value) + " is below the floor " + std::to_string(floor) + "; overlap or budget too small",
                                    r.D.value, floor);
  r.value = r.N.value / r.D.value;
  return r;
}

}  // namespace qcool
