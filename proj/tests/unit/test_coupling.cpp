#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "optoloss/coupling.hpp"
#include "optoloss/error.hpp"

using namespace optoloss;
using std::numbers::pi;

namespace {

// Brute-force kernels on a uniform grid: cumulative trapezoid for the inner
// integral on a 2x finer grid, composite Simpson outside.
FCoeffs simpson_kernels(const std::function<double(double)>& g, double tau, int n) {
  const double h = tau / n;
  std::vector<double> inner(n + 1, 0.0);
  const int fine = 2;
  double acc = 0.0;
  for (int i = 1; i <= n; ++i) {
    for (int k = 0; k < fine; ++k) {
      const double t0 = (i - 1) * h + k * h / fine, t1 = t0 + h / fine;
      const double tm = 0.5 * (t0 + t1);
      // Simpson on each fine panel.
      acc += h / fine / 6.0 *
             (g(t0) * std::cos(t0) + 4.0 * g(tm) * std::cos(tm) + g(t1) * std::cos(t1));
    }
    inner[i] = acc;
  }
  double fp = 0.0, fm = 0.0, fa = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double t = i * h;
    fp += w * g(t) * std::cos(t);
    fm += w * g(t) * std::sin(t);
    fa += w * g(t) * std::sin(t) * inner[i];
  }
  return {tau, -2.0 * fa * h / 3.0, -fp * h / 3.0, -fm * h / 3.0};
}

}  // namespace

TEST_CASE("closed-form kernels at reference points") {
  const FCoeffs a = f_coeffs_constant(1.0, 2 * pi);
  CHECK(a.f_a == doctest::Approx(-2 * pi).epsilon(1e-14));
  CHECK(std::abs(a.f_plus) < 1e-12);
  CHECK(std::abs(a.f_minus) < 1e-12);

  const FCoeffs z = f_coeffs_constant(0.7, 0.0);
  CHECK(z.f_a == 0.0);
  CHECK(z.f_plus == 0.0);
  CHECK(z.f_minus == 0.0);

  const FCoeffs h = f_coeffs_constant(0.5, pi);
  CHECK(h.f_a == doctest::Approx(-pi / 4).epsilon(1e-14));
  CHECK(std::abs(h.f_plus) < 1e-15);
  CHECK(h.f_minus == doctest::Approx(-1.0).epsilon(1e-14));

  CHECK_THROWS_AS(f_coeffs_constant(NAN, 1.0), DomainError);
  CHECK_THROWS_AS(f_coeffs_constant(1.0, -1.0), DomainError);
}

TEST_CASE("full periods close the displacement") {
  for (int k = 1; k <= 5; ++k)
    for (double g : {0.1, 0.5, 1.0, 2.3}) {
      const FCoeffs f = f_coeffs_constant(g, 2 * pi * k);
      CHECK(std::abs(f.f_plus) < 1e-12);
      CHECK(std::abs(f.f_minus) < 1e-12);
    }
}

TEST_CASE("derived phase and displacement") {
  CHECK(phase_A({2 * pi, -2 * pi, 0, 0}) == doctest::Approx(-2 * pi));
  CHECK(phase_A({}) == 0.0);
  CHECK(phase_A({pi, -pi / 4, 0, -1}) == doctest::Approx(-pi / 4));
  CHECK(std::abs(displacement_G({2 * pi, -2 * pi, 0, 0})) == 0.0);
  const cplx G = displacement_G({pi, -pi / 4, 0, -1});
  CHECK(G.real() == -1.0);
  CHECK(G.imag() == 0.0);
  // A = g^2 (sin tau - tau) for constant coupling.
  for (double t : {0.3, 1.0, 4.0}) {
    CHECK(phase_A(f_coeffs_constant(0.8, t)) ==
          doctest::Approx(0.64 * (std::sin(t) - t)).epsilon(1e-13));
  }
  CHECK(interference_B({1, 0}, {1, 0}) == 0.0);
  CHECK(interference_B({0, 1}, {1, 0}) == doctest::Approx(2.0));
}

TEST_CASE("quadrature path matches the closed form") {
  CHECK(std::abs(f_coeffs_general(CouplingProfile::constant(1.0), 2 * pi).f_a + 2 * pi) < 1e-9);
  const FCoeffs zero = f_coeffs_general(CouplingProfile::constant(0.0), 3.0);
  CHECK(zero.f_a == 0.0);
  CHECK(zero.f_plus == 0.0);
  CHECK(zero.f_minus == 0.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gd(-1.5, 1.5), td(0.0, 12.0);
  for (int i = 0; i < 40; ++i) {
    const double g = gd(rng), t = td(rng);
    const double g0 = g;
    const auto cb = CouplingProfile::callback([g0](double) { return g0; });
    const FCoeffs num = f_coeffs_general(cb, t);
    const FCoeffs ref = f_coeffs_constant(g, t);
    CHECK(std::abs(num.f_a - ref.f_a) < 1e-8);
    CHECK(std::abs(num.f_plus - ref.f_plus) < 1e-8);
    CHECK(std::abs(num.f_minus - ref.f_minus) < 1e-8);
  }
}

TEST_CASE("tabulated ramp against dense Simpson") {
  std::vector<double> ts, gs;
  for (int i = 0; i <= 400; ++i) {
    ts.push_back(2 * pi * i / 400);
    gs.push_back(ts.back() / (2 * pi));
  }
  const auto prof = CouplingProfile::tabulated(ts, gs);
  const FCoeffs num = f_coeffs_general(prof, 2 * pi);
  const FCoeffs ref = simpson_kernels([](double t) { return t / (2 * pi); }, 2 * pi, 100000);
  CHECK(std::abs(num.f_a - ref.f_a) < 1e-7);
  CHECK(std::abs(num.f_plus - ref.f_plus) < 1e-7);
  CHECK(std::abs(num.f_minus - ref.f_minus) < 1e-7);
}

TEST_CASE("tabulated profiles") {
  CHECK_THROWS_AS(CouplingProfile::tabulated({0, 1, 1}, {0, 0, 0}), DomainError);
  CHECK_THROWS_AS(CouplingProfile::tabulated({0, 1}, {0, NAN}), DomainError);
  const auto p = CouplingProfile::tabulated({0, 1, 2}, {0, 1, 1});
  CHECK(p(0.5) >= 0.0);
  CHECK(p(0.5) <= 1.0);
  // Monotone interpolation: no overshoot on the plateau.
  for (int i = 0; i <= 100; ++i) CHECK(p(1.0 + i / 100.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(p.require_window(3.0), DomainError);
  CHECK_NOTHROW(p.require_window(2.0));
  CHECK_THROWS_AS(f_coeffs_general(p, 2.5), DomainError);
}

TEST_CASE("profile csv") {
  const std::string path = "optoloss_profile_test.csv";
  {
    std::ofstream f(path);
    f << "\xEF\xBB\xBFtau,g\r\n0,0.5\r\n1,0.5\r\n7,0.5\r\n";
  }
  const auto p = read_profile_csv(path);
  CHECK(p(3.0) == doctest::Approx(0.5));
  const FCoeffs a = f_coeffs_general(p, 2 * pi);
  const FCoeffs b = f_coeffs_constant(0.5, 2 * pi);
  CHECK(std::abs(a.f_a - b.f_a) < 1e-8);
  {
    std::ofstream f(path);
    f << "time,g\n0,1\n";
  }
  CHECK_THROWS_AS(read_profile_csv(path), DomainError);
  std::remove(path.c_str());
}

TEST_CASE("kernel table interpolation") {
  const auto cb = CouplingProfile::callback([](double t) { return 0.5 + 0.3 * std::sin(0.7 * t); });
  const KernelTable tab(cb, 2 * pi);
  for (double t : {0.0, 0.37, 1.9, 4.4, 2 * pi}) {
    const FCoeffs a = tab.at(t), b = f_coeffs_general(cb, t);
    CHECK(std::abs(a.f_a - b.f_a) < 1e-8);
    CHECK(std::abs(a.f_plus - b.f_plus) < 1e-8);
    CHECK(std::abs(a.f_minus - b.f_minus) < 1e-8);
  }
}

TEST_CASE("quadrature rules") {
  const auto r = integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
  const auto c = integrate([](double x) { return std::exp(cplx(0, 5) * x); }, 0.0, pi);
  CHECK(std::abs(c.value - (std::exp(cplx(0, 5 * pi)) - 1.0) / cplx(0, 5)) < 1e-12);
  QuadConfig tight;
  tight.max_subdivisions = 2;
  tight.abs_tol = 1e-15;
  tight.rel_tol = 1e-15;
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(200 * x); }, 0.0, 10.0, tight),
                  ConvergenceError);
  QuadConfig bad;
  bad.abs_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  const GaussRule gl = gauss_legendre(10);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) s += gl.w[i] * std::pow(gl.x[i], 18);
  CHECK(s == doctest::Approx(2.0 / 19.0).epsilon(1e-14));
}
