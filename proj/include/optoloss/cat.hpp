#pragma once

#include <iosfwd>

#include "optoloss/fock.hpp"

namespace optoloss {

struct CatSpec {
  int components = 2;
  cplx alpha{1.0, 0.0};
  double g0() const;
};

// Coupling that turns a coherent state into a k-component cat at tau = 2 pi.
double components_to_coupling(int k);

// Cavity state at tau = 2 pi without loss: amplitudes of |alpha> dressed by
// exp(2 pi i g0^2 n^2). The n = 0 amplitude is real positive.
Vector ideal_cat_state(cplx alpha, double g0, int n, double leak_tol = 1e-12);

// Evolves coherent(alpha) (x) vacuum to tau = 2 pi and traces out the mechanics.
Matrix noisy_cat_density(cplx alpha, double g0, double kappa, const FockDims& dims,
                         const EvolveConfig& cfg = {});

// `n,re,im` rows.
void write_cat_csv(std::ostream& os, const Vector& psi);

}  // namespace optoloss
