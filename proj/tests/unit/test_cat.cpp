#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "optoloss/cat.hpp"
#include "optoloss/error.hpp"
#include "optoloss/observables.hpp"

using namespace optoloss;
using std::numbers::pi;

TEST_CASE("two-component cat") {
  const int n = 30;
  const Vector psi = ideal_cat_state(1.5, 0.5, n);
  const Vector plus = coherent_state(1.5, n, 1e-12), minus = coherent_state(-1.5, n, 1e-12);
  const Vector ref = cplx(0.5, 0.5) * plus + cplx(0.5, -0.5) * minus;
  // Equal up to the global phase fixed by a real positive vacuum amplitude.
  const cplx ph = ref(0) / std::abs(ref(0));
  CHECK((psi - std::conj(ph) * ref).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("integer coupling and vacuum") {
  const Vector c = coherent_state(cplx(0.8, 0.6), 25, 1e-12);
  for (double g : {0.0, 1.0, 2.0}) {
    const Vector psi = ideal_cat_state(cplx(0.8, 0.6), g, 25);
    CHECK(std::abs(std::abs(c.dot(psi)) - 1.0) < 1e-12);
  }
  const Vector v = ideal_cat_state(0.0, 0.5, 6);
  CHECK(v(0) == cplx(1.0));
  CHECK(v.tail(5).norm() == 0.0);
}

TEST_CASE("component counts") {
  CHECK(components_to_coupling(2) == 0.5);
  CHECK(components_to_coupling(3) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(components_to_coupling(4) == doctest::Approx(1.0 / std::sqrt(8.0)));
  CHECK_THROWS_AS(components_to_coupling(5), DomainError);
  CHECK(CatSpec{3, 1.0}.g0() == components_to_coupling(3));
}

TEST_CASE("number-state phases") {
  const double g = 0.5;
  const Vector psi = ideal_cat_state(1.2, g, 20);
  const Vector c = coherent_state(1.2, 20, 1e-12);
  CHECK(psi(0).imag() == 0.0);
  CHECK(psi(0).real() > 0.0);
  for (int k = 0; k < 20; ++k) {
    const cplx want = c(k) * std::polar(1.0, 2 * pi * g * g * k * k);
    CHECK(std::abs(psi(k) - want) < 1e-13);
  }
  // g = 1/2: even levels keep their phase, odd levels pick up i.
  CHECK(std::abs(psi(1) / c(1) - cplx(0, 1)) < 1e-13);
  CHECK(std::abs(psi(2) / c(2) - 1.0) < 1e-13);
}

TEST_CASE("cat under loss") {
  const cplx alpha = 1.0;
  FockDims d = suggest_dims(alpha, 0.0, 0.0, 0.5);
  const Vector ideal = ideal_cat_state(alpha, 0.5, d.n_cav, 1e-8);

  EvolveConfig lossless;
  lossless.mech_cutoffs = suggest_mech_cutoffs(alpha, 0.0, 0.0, 0.5, d.n_cav, 0.0, 2 * pi);
  d.n_mech = lossless.mech_cutoffs.back();
  const Matrix r0 = noisy_cat_density(alpha, 0.5, 0.0, d, lossless);
  CHECK(std::abs(state_fidelity(ideal, r0) - 1.0) < 1e-8);
  CHECK((r0 - r0.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(r0.trace() - 1.0) < 1e-8);

  EvolveConfig lossy;
  lossy.mech_cutoffs = suggest_mech_cutoffs(alpha, 0.0, 0.0, 0.5, d.n_cav, 0.1, 2 * pi);
  FockDims dl{d.n_cav, lossy.mech_cutoffs.back()};
  const Matrix r1 = noisy_cat_density(alpha, 0.5, 0.1, dl, lossy);
  const double f = state_fidelity(ideal, r1);
  CHECK(f == doctest::Approx(cat_fidelity(alpha, 0.5, 0.1, FidelityTruncation::for_alpha(alpha)))
                 .epsilon(1e-6));
  CHECK(std::abs(r1.trace() - 1.0) < 1e-8);

  const Matrix v = noisy_cat_density(0.0, 0.5, 0.3, {3, 3}, EvolveConfig{});
  CHECK(std::abs(v(0, 0) - 1.0) < 1e-14);
}

TEST_CASE("cat csv") {
  std::ostringstream os;
  Vector psi(2);
  psi << cplx(0.6, 0.0), cplx(0.0, -0.8);
  write_cat_csv(os, psi);
  CHECK(os.str() == "n,re,im\n0,0.59999999999999998,0\n1,0,-0.80000000000000004\n");
}
