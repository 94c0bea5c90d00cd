#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "optoloss/fock.hpp"

namespace optoloss {

struct GridAxis {
  double min = -5.0;
  double max = 5.0;
  int count = 201;

  double step() const { return count > 1 ? (max - min) / (count - 1) : 0.0; }
  double at(int i) const { return min + i * step(); }
  void validate() const;
};

struct WignerGrid {
  GridAxis x;
  GridAxis p;
  Eigen::MatrixXd values;  // values(i, j) = W(x_i, p_j)

  double integral() const;
};

// W(X, P) = Tr[rho D(g) Pi D(g)^dag] / pi with g = (X + iP)/sqrt(2). Throws
// GridCoverageError when the Riemann sum misses 1 by more than norm_tol.
WignerGrid wigner(const Matrix& rho_c, const GridAxis& x = {}, const GridAxis& p = {},
                  double norm_tol = 5e-3, int jobs = 1);

// Riemann sum of max(0, -W).
double negativity_volume(const WignerGrid& w);

// Long form `X,P,W`.
void write_wigner_csv(std::ostream& os, const WignerGrid& w);
// Dense matrix: header row of P values, then one row per X value led by X.
void write_wigner_matrix(std::ostream& os, const WignerGrid& w);

}  // namespace optoloss
