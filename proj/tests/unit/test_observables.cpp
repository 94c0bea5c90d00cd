#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "optoloss/error.hpp"
#include "optoloss/observables.hpp"
#include "optoloss/oracle.hpp"

using namespace optoloss;
using std::numbers::pi;

namespace {

SystemParams sys_const(double g0, double kappa) {
  SystemParams s;
  s.g_profile = CouplingProfile::constant(g0);
  s.kappa = kappa;
  return s;
}

InitialState coherent(cplx alpha, cplx beta = 0.0) { return {alpha, CoherentMech{beta}}; }
InitialState thermal(cplx alpha, double nbar) { return {alpha, ThermalMech{nbar}}; }

// Frozen from the independent Fock oracle (13 x 120, Chebyshev propagator)
// and a 30-digit Bessel-series evaluation; see the fidelity tests below.
constexpr double kFidelityAlpha1 = 0.747823884226668;
constexpr double kFidelityAlpha2_10 = 0.633372799452030;

}  // namespace

TEST_CASE("photon number") {
  CHECK(photon_number(1.0, 0.0, 17.3) == 1.0);
  CHECK(photon_number(std::sqrt(10.0), 0.01, 2 * pi) ==
        doctest::Approx(10.0 * std::exp(-0.02 * pi)).epsilon(1e-15));
  // The quoted 9.39089 is a rounded reading; 10 e^{-0.02 pi} = 9.391013.
  CHECK(photon_number(std::sqrt(10.0), 0.01, 2 * pi) == doctest::Approx(9.39089).epsilon(2e-5));
  CHECK_THROWS_AS(photon_number(1.0, -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(photon_number(1.0, 0.1, -1.0), DomainError);
}

TEST_CASE("<a> closed-form limits") {
  const cplx alpha{0.8, -0.3};
  CHECK(std::abs(expect_a(coherent(alpha), sys_const(1.0, 0.0), 2 * pi) - alpha) < 1e-10);
  CHECK(std::abs(expect_a(coherent(alpha, {0.4, 0.2}), sys_const(0.7, 0.3), 0.0) - alpha) < 1e-15);
  CHECK_THROWS_AS(expect_a(thermal(alpha, 1.0), sys_const(1.0, 0.0), 1.0), DomainError);
  CHECK_THROWS_AS(expect_a_thermal(coherent(alpha), sys_const(1.0, 0.0), 1.0), DomainError);
  CHECK_THROWS_AS(expect_a(coherent(alpha), sys_const(1.0, 0.0), -1.0), DomainError);
}

TEST_CASE("thermal mechanics") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const cplx alpha{1.5 * u(rng), u(rng) - 0.5};
    const auto sys = sys_const(1.2 * u(rng), 0.5 * u(rng));
    const double t = 7.0 * u(rng);
    CHECK(std::abs(expect_a_thermal(thermal(alpha, 0.0), sys, t) -
                   expect_a(coherent(alpha), sys, t)) < 1e-12);
  }
  // G(2 pi) = 0 removes every trace of the phonon occupation.
  const cplx bare = expect_a(coherent(1.0), sys_const(1.0, 0.0), 2 * pi);
  CHECK(std::abs(expect_a_thermal(thermal(1.0, 5.0), sys_const(1.0, 0.0), 2 * pi) - bare) < 1e-10);
}

TEST_CASE("quadrature traces") {
  std::vector<double> taus;
  for (int i = 0; i <= 64; ++i) taus.push_back(2 * pi * i / 64);
  const auto [x, p] = quadrature_trace(coherent(1.0), sys_const(1.0, 0.0), taus);
  CHECK(std::abs(x.values.front() - x.values.back()) < 1e-8);
  CHECK(std::abs(p.values.front() - p.values.back()) < 1e-8);

  const auto [x0, p0] = quadrature_trace(coherent({0.3, 0.7}), sys_const(1.0, 0.2), {0.0});
  CHECK(x0.values[0].real() == doctest::Approx(std::sqrt(2.0) * 0.3));
  CHECK(p0.values[0].real() == doctest::Approx(std::sqrt(2.0) * 0.7));

  const auto lossy = expect_a_trace(coherent(1.0), sys_const(1.0, 0.5), {0.0, 2 * pi});
  CHECK(std::abs(lossy.values[1]) < std::abs(lossy.values[0]));

  CHECK_THROWS_AS(expect_a_trace(coherent(1.0), sys_const(1.0, 0.5), {1.0, 1.0}), DomainError);

  std::ostringstream os;
  write_trace_csv(os, lossy, true);
  CHECK(os.str().rfind("tau,re,im,X,P\n0,1,0,1.4142135623730951,0\n", 0) == 0);
}

TEST_CASE("time-dependent coupling") {
  // A profile that equals the constant inside the window gives the same <a>.
  const auto cb = CouplingProfile::callback([](double) { return 0.6; });
  SystemParams s = sys_const(0.6, 0.3);
  SystemParams c = s;
  c.g_profile = cb;
  for (double t : {0.5, 2.0, 5.5}) {
    CHECK(std::abs(expect_a(coherent(1.0, 0.3), c, t) - expect_a(coherent(1.0, 0.3), s, t)) < 1e-8);
  }
}

TEST_CASE("decay bound") {
  CHECK(quadrature_decay_bound(1.3, sys_const(1.0, 0.0), 2 * pi) ==
        doctest::Approx(1.69).epsilon(1e-12));
  CHECK(quadrature_decay_bound(1.0, sys_const(0.5, 1.0), 50.0) < 1e-20);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const cplx alpha{2.0 * u(rng), u(rng)};
    const auto sys = sys_const(1.5 * u(rng), u(rng));
    const double t = 10.0 * u(rng);
    const double bound = quadrature_decay_bound(alpha, sys, t);
    CHECK(std::norm(expect_a(coherent(alpha), sys, t)) <= bound * (1.0 + 1e-12));
  }
}

TEST_CASE("cat fidelity") {
  for (double g : {0.3, 0.5, 1.0}) {
    CHECK(cat_fidelity(1.5, g, 0.0, FidelityTruncation::for_alpha(1.5)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(cat_fidelity(1.0, 0.5, 0.1, FidelityTruncation::for_alpha(1.0)) ==
        doctest::Approx(kFidelityAlpha1).epsilon(1e-10));

  // The stated 0.985-0.995 window is not reached by the double sum; the
  // 0.99 figure is the upper bound.
  const auto t0 = std::chrono::steady_clock::now();
  const double f10 =
      cat_fidelity(std::sqrt(10.0), 0.5, 0.01, FidelityTruncation::for_alpha(std::sqrt(10.0)));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(f10 == doctest::Approx(kFidelityAlpha2_10).epsilon(1e-9));
  CHECK(secs < 5.0);
  const auto b10 = fidelity_bounds(std::sqrt(10.0), 0.01);
  CHECK(b10.upper > 0.985);
  CHECK(b10.upper < 0.995);

  FidelityTruncation shallow = FidelityTruncation::for_alpha(2.0);
  shallow.n_max = 5;
  CHECK_THROWS_AS(cat_fidelity(2.0, 0.5, 0.1, shallow), TruncationError);
  CHECK(FidelityTruncation::for_alpha(2.0).n_max > 5);
  CHECK(poisson_tail(4.0, FidelityTruncation::for_alpha(2.0).n_max) < 1e-12);
}

TEST_CASE("cat fidelity against the Fock oracle") {
  FockDims d = suggest_dims(1.0, 0.0, 0.0, 0.5, 1e-8);
  EvolveConfig cfg;
  cfg.mech_cutoffs = suggest_mech_cutoffs(1.0, 0.0, 0.0, 0.5, d.n_cav, 0.1, 2 * pi, 1e-8);
  d.n_mech = cfg.mech_cutoffs.back();
  ProductState rho{Matrix(), Matrix::Zero(d.n_mech, d.n_mech)};
  const Vector psi0 = coherent_state(1.0, d.n_cav);
  rho.cav = psi0 * psi0.adjoint();
  rho.mech(0, 0) = 1.0;
  Matrix rc;
  evolve_sampled(rho, CouplingProfile::constant(0.5), 0.1, {2 * pi}, cfg,
                 [&](double, const OracleSnapshot& s) { rc = s.cavity_state(); });
  Vector ideal(d.n_cav);
  for (int n = 0; n < d.n_cav; ++n) ideal(n) = psi0(n) * std::polar(1.0, 2 * pi * 0.25 * n * n);
  const double f = std::real(ideal.dot(rc * ideal));
  CHECK(std::abs(f - cat_fidelity(1.0, 0.5, 0.1, FidelityTruncation::for_alpha(1.0))) < 1e-6);
}

TEST_CASE("fidelity series") {
  CHECK(cat_fidelity_series(1.0, 0.5, 0.0, 3) == 1.0);
  const double full = cat_fidelity(1.0, 0.5, 0.05, FidelityTruncation::for_alpha(1.0));
  const double s1 = cat_fidelity_series(1.0, 0.5, 0.05, 1);
  const double s2 = cat_fidelity_series(1.0, 0.5, 0.05, 2);
  const double s3 = cat_fidelity_series(1.0, 0.5, 0.05, 3);
  CHECK(std::abs(s3 - full) < 5e-4);
  // Successive corrections shrink roughly by kappa |alpha|^2.
  const double d12 = std::abs(s2 - s1), d23 = std::abs(s3 - s2);
  CHECK(d23 < d12);
  CHECK(d23 / d12 < 0.2);
  CHECK(std::abs(full - s3) < d23);
  CHECK_THROWS_AS(cat_fidelity_series(1.0, 0.5, 0.05, 4), DomainError);
}

TEST_CASE("fidelity bounds") {
  const auto b0 = fidelity_bounds(1.7, 0.0);
  CHECK(b0.lower == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b0.upper == 1.0);
  const auto binf = fidelity_bounds(1.3, 1e3);
  CHECK(binf.lower == doctest::Approx(std::exp(-1.69)).epsilon(1e-12));
  CHECK(binf.upper == doctest::Approx(std::exp(-1.69)).epsilon(1e-12));

  const double s3 = std::sqrt(3.0);
  const double f = cat_fidelity(s3, 0.5, 0.1, FidelityTruncation::for_alpha(s3));
  CHECK(fidelity_bounds(s3, 0.1).lower <= f);
  CHECK(f <= fidelity_bounds(s3, 0.1).upper);

  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double a = 0.5 + 1.5 * i / 4, k = 0.5 * j / 4;
      const double fv = cat_fidelity(a, 0.5, k, FidelityTruncation::for_alpha(a));
      const auto b = fidelity_bounds(a, k);
      CHECK(b.lower <= fv + 1e-12);
      CHECK(fv <= b.upper + 1e-12);
    }
}

TEST_CASE("fidelity decreases with loss") {
  for (double a : {1.0, std::sqrt(3.0)}) {
    double prev = 2.0;
    for (int j = 0; j <= 20; ++j) {
      const double f = cat_fidelity(a, 0.5, 0.025 * j, FidelityTruncation::for_alpha(a));
      CHECK(f <= prev + 1e-12);
      prev = f;
    }
  }
}

TEST_CASE("photon number is independent of coupling and mechanics") {
  for (double g : {0.0, 0.5, 1.0}) {
    const auto o = oracle_series(coherent(1.0), g, 0.5, {1.0, pi}, OracleTolerance::uniform(1e-5));
    CHECK(std::abs(o.n[0] - photon_number(1.0, 0.5, 1.0)) < 1e-6);
    CHECK(std::abs(o.n[1] - photon_number(1.0, 0.5, pi)) < 1e-6);
  }
}

TEST_CASE("<a> against the Fock oracle") {
  const auto o = oracle_series(coherent(1.0), 1.0, 0.5, {pi}, OracleTolerance::uniform(1e-5));
  const cplx ref = expect_a(coherent(1.0), sys_const(1.0, 0.5), pi);
  CHECK(std::abs(std::abs(o.a[0]) - std::abs(ref)) < 1e-5);
  CHECK(std::abs(std::arg(o.a[0] / ref)) < 1e-5);

  const auto t =
      oracle_series(thermal(1.0, 2.0), 0.5, 0.2, {pi / 2}, OracleTolerance::uniform(1e-5));
  CHECK(std::abs(t.a[0] - expect_a_thermal(thermal(1.0, 2.0), sys_const(0.5, 0.2), pi / 2)) < 1e-5);
}

TEST_CASE("<a> oracle equivalence sweep") {
  struct Case {
    double a, g, k;
  };
  const Case cases[] = {{0.5, 0.5, 0.0}, {0.5, 0.5, 0.1}, {0.5, 0.5, 0.5}, {1.0, 0.5, 0.0},
                        {1.0, 0.5, 0.1}, {1.0, 0.5, 0.5}, {0.5, 1.0, 0.2}};
  for (const Case& c : cases) {
    CAPTURE(c.a);
    CAPTURE(c.g);
    CAPTURE(c.k);
    const std::vector<double> taus{pi / 2, pi, 2 * pi};
    const auto o = oracle_series(coherent(c.a), c.g, c.k, taus, OracleTolerance::uniform(1e-6));
    const auto ref = expect_a_trace(coherent(c.a), sys_const(c.g, c.k), taus);
    for (std::size_t i = 0; i < taus.size(); ++i) CHECK(std::abs(o.a[i] - ref.values[i]) < 1e-5);
  }
}
