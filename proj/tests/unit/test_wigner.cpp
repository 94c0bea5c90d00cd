#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "doctest.h"
#include "optoloss/cat.hpp"
#include "optoloss/error.hpp"
#include "optoloss/wigner.hpp"

using namespace optoloss;
using std::numbers::pi;

namespace {

Matrix projector(const Vector& v) { return v * v.adjoint(); }

}  // namespace

TEST_CASE("vacuum") {
  Matrix vac = Matrix::Zero(6, 6);
  vac(0, 0) = 1.0;
  const WignerGrid w = wigner(vac, {-5, 5, 101}, {-5, 5, 101});
  CHECK(std::abs(w.values(50, 50) - 1.0 / pi) < 1e-6);
  CHECK(w.values.minCoeff() >= 0.0);
  CHECK(std::abs(w.integral() - 1.0) < 1e-6);
  CHECK(negativity_volume(w) == 0.0);
  // Gaussian of unit variance in each quadrature.
  CHECK(std::abs(w.values(60, 50) - std::exp(-1.0) / pi) < 1e-12);
}

TEST_CASE("coherent state is a displaced vacuum") {
  const cplx beta(1.0, -0.5);
  const Matrix rho = projector(coherent_state(beta, 30, 1e-14));
  const WignerGrid w = wigner(rho, {-5, 5, 101}, {-5, 5, 101});
  const double x0 = std::sqrt(2.0) * beta.real(), p0 = std::sqrt(2.0) * beta.imag();
  double dev = 0.0;
  for (int i = 0; i < 101; ++i)
    for (int j = 0; j < 101; ++j) {
      const double dx = w.x.at(i) - x0, dp = w.p.at(j) - p0;
      dev = std::max(dev, std::abs(w.values(i, j) - std::exp(-dx * dx - dp * dp) / pi));
    }
  CHECK(dev < 1e-10);
}

TEST_CASE("cat negativity") {
  const Matrix cat = projector(ideal_cat_state(std::sqrt(3.0), 0.5, 30));
  const WignerGrid w = wigner(cat, {-6, 6, 121}, {-6, 6, 121});
  CHECK(w.values.minCoeff() < -0.05);
  CHECK(negativity_volume(w) > 0.05);
  CHECK(std::abs(w.integral() - 1.0) < 1e-4);
  // Worker threads change nothing.
  const WignerGrid w4 = wigner(cat, {-6, 6, 121}, {-6, 6, 121}, 5e-3, 4);
  CHECK((w4.values.array() == w.values.array()).all());
}

TEST_CASE("linearity in the state") {
  const Matrix a = projector(coherent_state(0.7, 20, 1e-12));
  const Matrix b = projector(ideal_cat_state(1.1, 0.5, 20, 1e-10));
  const GridAxis ax{-4, 4, 41};
  const WignerGrid wa = wigner(a, ax, ax), wb = wigner(b, ax, ax);
  const WignerGrid wm = wigner(0.3 * a + 0.7 * b, ax, ax);
  CHECK((wm.values - 0.3 * wa.values - 0.7 * wb.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("grid coverage") {
  const Matrix rho = projector(coherent_state(2.0, 30, 1e-12));
  try {
    wigner(rho, {-1, 1, 21}, {-1, 1, 21});
    FAIL("expected a coverage error");
  } catch (const GridCoverageError& e) {
    CHECK(e.integral() < 0.5);
  }
  CHECK_THROWS_AS(wigner(rho, {1, -1, 21}), DomainError);
  CHECK_THROWS_AS(wigner(Matrix::Zero(2, 3)), DomainError);
}

TEST_CASE("wigner output") {
  Matrix vac = Matrix::Zero(3, 3);
  vac(0, 0) = 1.0;
  const WignerGrid w = wigner(vac, {-6, 6, 3}, {-6, 6, 2}, 10.0);
  std::ostringstream csv, mat;
  write_wigner_csv(csv, w);
  write_wigner_matrix(mat, w);
  const std::string c = csv.str(), m = mat.str();
  CHECK(c.rfind("X,P,W\n", 0) == 0);
  CHECK(std::count(c.begin(), c.end(), '\n') == 7);
  CHECK(std::count(m.begin(), m.end(), '\n') == 4);
  CHECK(m.find("0,") != std::string::npos);
}
