#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qcool/hadamard.hpp"
#include "qcool/models.hpp"

using namespace qcool;

namespace {

StateVector random_state(int n, std::uint64_t seed) {
  rng_t rng(seed);
  std::normal_distribution<double> n01;
  cvec v(Eigen::Index{1} << n);
  for (auto& c : v) c = cplx(n01(rng), n01(rng));
  return StateVector(v);
}

struct Moments {
  double mean = 0, sd = 0;
  std::size_t truncated = 0;
  double max_abs = 0;
};

template <class F>
Moments collect(std::size_t n, F&& draw) {
  double s = 0, s2 = 0;
  Moments m;
  for (std::size_t k = 0; k < n; ++k) {
    const auto [v, trunc, mag] = draw(k);
    s += v;
    s2 += v * v;
    m.truncated += trunc;
    m.max_abs = std::max(m.max_abs, mag);
  }
  m.mean = s / static_cast<double>(n);
  m.sd = std::sqrt(std::max(0.0, s2 / static_cast<double>(n) - m.mean * m.mean) / static_cast<double>(n));
  return m;
}

}  // namespace

TEST(Hadamard, IdentityUnitary) {
  PauliSum h(2);
  h.add(0.5, "XZ");
  const auto es = eigendecompose(h, random_state(2, 1));
  const auto u = UnitarySpec::evolution(0.0, 1.0);
  rng_t rng(1);
  int zeros_b0 = 0, zeros_b1 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    zeros_b0 += hadamard_shot(es, u, 0, rng) == 0;
    zeros_b1 += hadamard_shot(es, u, 1, rng) == 0;
  }
  EXPECT_EQ(zeros_b0, n);
  EXPECT_NEAR(zeros_b1 / double(n), 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(Hadamard, OutcomeFrequencyMatchesOverlap) {
  const auto h = random_pauli_hamiltonian(2, 6, 3);
  const auto es = eigendecompose(h, random_state(2, 3));
  const PauliString p("XY");
  for (const auto& u : {UnitarySpec::evolution(0.8, 1.3), UnitarySpec::sandwich(-0.4, p, 0.9, 1.3)}) {
    const cplx v = unitary_value(es, u);
    for (int b : {0, 1}) {
      rng_t rng(7 + b);
      const int n = 100000;
      int zeros = 0;
      for (int i = 0; i < n; ++i) zeros += hadamard_shot(es, u, b, rng) == 0;
      const double p0 = 0.5 * (1 + (b == 0 ? v.real() : v.imag()));
      EXPECT_NEAR(zeros / double(n), p0, 3 * std::sqrt(p0 * (1 - p0) / n) + 1e-12);
    }
  }
}

TEST(Hadamard, RejectsOverlapAboveOne) {
  rng_t rng(1);
  EXPECT_THROW(hadamard_outcome(cplx(1.1, 0), 0, rng), error);
  EXPECT_NO_THROW(hadamard_outcome(cplx(1.0 + 1e-12, 0), 0, rng));
}

TEST(EstimatorR, Values) {
  EXPECT_EQ(estimator_r(0, 0), cplx(2, 0));
  EXPECT_EQ(estimator_r(0, 1), cplx(-2, 0));
  EXPECT_EQ(estimator_r(1, 0), cplx(0, 2));
  EXPECT_EQ(estimator_r(1, 1), cplx(0, -2));
}

TEST(EstimatorR, UnbiasedForOverlap) {
  const auto h = random_pauli_hamiltonian(2, 5, 9);
  const auto es = eigendecompose(h, random_state(2, 9));
  const auto u = UnitarySpec::evolution(1.1, 0.9);
  const cplx v = unitary_value(es, u);
  rng_t rng(4);
  const int n = 100000;
  cplx s = 0;
  for (int i = 0; i < n; ++i) {
    const int b = random_bit(rng);
    s += estimator_r(b, hadamard_shot(es, u, b, rng));
  }
  s /= double(n);
  // each component has variance at most 2^2 * 2 (b uniform): sd <= 2 sqrt(2)/sqrt(n)
  const double tol = 3 * 2 * std::sqrt(2.0) / std::sqrt(double(n));
  EXPECT_NEAR(s.real(), v.real(), tol);
  EXPECT_NEAR(s.imag(), v.imag(), tol);
}

TEST(DShot, ZeroCutoffAlwaysTruncated) {
  const auto h = random_pauli_hamiltonian(2, 4, 2);
  const auto es = eigendecompose(h, random_state(2, 2));
  const CoolingFunction cf(Kind::gaussian);
  for (std::uint64_t k = 0; k < 1000; ++k) {
    auto rng = keyed_stream(1, 1, k);
    const auto r = d_shot(es, cf, 1.0, 0.0, rng);
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(d_value(r, 1.0, 0.3), cplx(0));
  }
}

TEST(DShot, RecordInvariants) {
  const auto h = random_pauli_hamiltonian(3, 6, 5);
  const auto es = eigendecompose(h, random_state(3, 5));
  for (Kind k : realizable_kinds) {
    const CoolingFunction cf(k);
    for (std::uint64_t i = 0; i < 2000; ++i) {
      auto rng = keyed_stream(3, 1, i);
      const auto r = d_shot(es, cf, 1.0, 2.0, rng);
      EXPECT_EQ(r.truncated, !(std::abs(r.t1) <= 2.0));
      EXPECT_EQ(r.truncated, r.raw_r == cplx(0));
      if (!r.truncated) EXPECT_NEAR(std::abs(r.raw_r), 2.0, 1e-15);
    }
  }
}

TEST(DShot, EigenstateMeanIsTruncatedMass) {
  const auto h = random_pauli_hamiltonian(3, 8, 6);
  const auto base = eigendecompose(h, random_state(3, 6));
  const auto es = eigendecompose(h, StateVector(base.vectors().col(2)));
  const double ej = es.energy(2);
  for (Kind k : {Kind::gaussian, Kind::exponential}) {
    const CoolingFunction cf(k);
    const double x_m = 1.5, tau = 1.3;
    const oracle::Autoconvolution pt(oracle::Density(k), x_m, k == Kind::gaussian ? 40.0 : 300.0);
    const auto m = collect(100000, [&](std::size_t i) {
      auto rng = keyed_stream(11, 1, i);
      const auto r = d_shot(es, cf, tau, x_m, rng);
      const cplx d = d_value(r, tau, ej);
      return std::tuple{d.real(), r.truncated ? 1 : 0, std::abs(d)};
    });
    EXPECT_NEAR(m.mean, pt.mass(), 3 * m.sd) << kind_name(k);
    EXPECT_LE(m.max_abs, 2.0 + 1e-12);
    // truncation frequency against 1 - int_{-x_m}^{x_m} p~
    const double q = 1 - pt.mass();
    EXPECT_NEAR(m.truncated / 1e5, q, 3 * std::sqrt(q * (1 - q) / 1e5)) << kind_name(k);
  }
}

TEST(DShot, UnbiasedAgainstQuadrature) {
  const auto h = random_pauli_hamiltonian(3, 10, 12);
  const auto psi = random_state(3, 12);
  const auto es = eigendecompose(h, psi);
  const oracle::Spectrum sp(oracle::kron_sum(h), psi.amplitudes());
  const CoolingFunction cf(Kind::gaussian);
  const double x_m = 2.5, tau = 1.1;
  const oracle::Autoconvolution pt(oracle::Density(Kind::gaussian), x_m, 40.0);
  for (double e : {0.5, 2.0, 3.5}) {
    const double want = oracle::truncated_D(sp, pt, tau, e);
    const auto m = collect(100000, [&](std::size_t i) {
      auto rng = keyed_stream(21, 1, i);
      const cplx d = d_value(d_shot(es, cf, tau, x_m, rng), tau, e);
      return std::tuple{d.real(), 0, std::abs(d)};
    });
    EXPECT_NEAR(m.mean, want, 3 * 2 / std::sqrt(1e5)) << "E=" << e;
  }
}

TEST(NShot, ZeroCutoffAndIdentity) {
  const auto h = random_pauli_hamiltonian(3, 8, 13);
  const auto es = eigendecompose(h, random_state(3, 13));
  const CoolingFunction cf(Kind::gaussian);
  PauliSum id(3);
  id.add(1.0, "III");
  const Observable o = id;
  for (std::uint64_t i = 0; i < 500; ++i) {
    auto rng = keyed_stream(1, 2, i);
    const auto r = n_shot(es, cf, 1.0, 0.0, o, rng);
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(n_value(r, 1.0, 0.5, 1.0), cplx(0));
  }
  // identity observable: N-shots reduce to D-style evolution by (x - x') tau
  const double x_m = 3.0, tau = 0.8, e = 1.7;
  const auto n = collect(100000, [&](std::size_t i) {
    auto rng = keyed_stream(5, 2, i);
    const cplx v = n_value(n_shot(es, cf, tau, x_m, o, rng), tau, e, 1.0);
    return std::tuple{v.real(), 0, std::abs(v)};
  });
  const auto d = collect(100000, [&](std::size_t i) {
    auto rng = keyed_stream(6, 2, i);
    const double x = cf.sample_x(rng), xp = cf.sample_x(rng);
    if (std::abs(x) > x_m || std::abs(xp) > x_m) return std::tuple{0.0, 1, 0.0};
    const cplx v = es.autocorrelation((x - xp) * tau) * std::polar(1.0, -tau * (x - xp) * e);
    return std::tuple{v.real(), 0, std::abs(v)};
  });
  EXPECT_NEAR(n.mean, d.mean, 3 * std::hypot(n.sd, d.sd));
}

TEST(NShot, UnbiasedAgainstDoubleQuadrature) {
  const auto h = random_pauli_hamiltonian(3, 10, 14);
  const auto psi = random_state(3, 14);
  const auto es = eigendecompose(h, psi);
  const oracle::Spectrum sp(oracle::kron_sum(h), psi.amplitudes());
  PauliSum o(3);
  o.add(0.7, "ZII");
  o.add(0.3, "IXI");
  const Observable obs = o;
  const CoolingFunction cf(Kind::gaussian);
  const oracle::Density p(Kind::gaussian);
  const double x_m = 2.0, tau = 1.2;
  for (double e : {0.8, 2.4}) {
    const double want = oracle::truncated_N(sp, p, x_m, tau, e, oracle::kron_sum(o));
    const auto m = collect(200000, [&](std::size_t i) {
      auto rng = keyed_stream(31, 2, i);
      const cplx v = n_value(n_shot(es, cf, tau, x_m, obs, rng), tau, e, o.one_norm());
      return std::tuple{v.real(), 0, std::abs(v)};
    });
    EXPECT_NEAR(m.mean, want, 3 * 2 * o.one_norm() / std::sqrt(2e5)) << "E=" << e;
    EXPECT_LE(m.max_abs, 2 * o.one_norm() + 1e-12);
  }
}

TEST(NShot, ExpectationModeMatchesQuadrature) {
  const auto h = random_pauli_hamiltonian(3, 10, 15);
  const auto psi = random_state(3, 15);
  const auto es = eigendecompose(h, psi);
  const oracle::Spectrum sp(oracle::kron_sum(h), psi.amplitudes());
  PauliSum o(3);
  o.add(0.7, "ZII");
  o.add(-0.3, "IXY");
  const Observable obs = o;
  const CoolingFunction cf(Kind::sech);
  const double x_m = 2.0, tau = 1.2, e = 1.5;
  const double want = oracle::truncated_N(sp, oracle::Density(Kind::sech), x_m, tau, e, oracle::kron_sum(o));
  const auto m = collect(100000, [&](std::size_t i) {
    auto rng = keyed_stream(41, 2, i);
    const cplx v = n_value(n_shot(es, cf, tau, x_m, obs, rng, Mode::expectation), tau, e, 1.0);
    return std::tuple{v.real(), 0, std::abs(v)};
  });
  EXPECT_NEAR(m.mean, want, 3 * m.sd + 1e-12);
}

TEST(NShot, Errors) {
  const auto h = random_pauli_hamiltonian(2, 3, 1);
  const auto es = eigendecompose(h, random_state(2, 1));
  rng_t rng(1);
  EXPECT_THROW(n_shot(es, CoolingFunction(Kind::gaussian), 1, 1, Observable(PauliSum(2)), rng), domain_error);
  EXPECT_THROW(d_shot(es, CoolingFunction(Kind::rectangular), 1, 1, rng), non_realizable_error);
}

TEST(KeyedStream, DeterministicAndDistinct) {
  auto a = keyed_stream(1, 1, 5), b = keyed_stream(1, 1, 5), c = keyed_stream(1, 1, 6), d = keyed_stream(2, 1, 5), e = keyed_stream(1, 2, 5);
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  EXPECT_NE(va, d());
  EXPECT_NE(va, e());
}
