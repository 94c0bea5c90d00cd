#pragma once

#include <vector>

#include "optoloss/fock.hpp"
#include "optoloss/observables.hpp"

namespace optoloss {

// Truncation settings for one oracle run. leak bounds the edge population the
// evolution tolerates; cutoff_leak and norm size the mechanical cutoffs.
struct OracleTolerance {
  double leak = 1e-6;
  double cutoff_leak = 1e-6;
  TailNorm norm = TailNorm::population;

  static OracleTolerance uniform(double leak, TailNorm norm = TailNorm::population) {
    return {leak, leak, norm};
  }
};

struct OracleSeries {
  std::vector<cplx> a;       // empty unless requested
  std::vector<double> n;
  EvolveStats stats;
  FockDims dims;
};

// <a> and <N_a> of the brute-force oracle at each tau, starting from
// coherent(alpha) with coherent or thermal mechanics. Only coherence orders 0
// and 1 are propagated; mechanical cutoffs are ragged and sized for the window.
OracleSeries oracle_series(const InitialState& init, double g0, double kappa,
                           const std::vector<double>& taus, const OracleTolerance& tol,
                           bool need_a = true);

// Cavity state of the cat protocol at tau = 2 pi. Without loss it is the
// ideal cat itself. The fidelity is linear in the coherence blocks, so at
// small kappa it wants amplitude cutoffs.
Matrix oracle_cat_state(cplx alpha, double g0, double kappa, const OracleTolerance& tol);
double oracle_cat_fidelity(cplx alpha, double g0, double kappa, const OracleTolerance& tol);

}  // namespace optoloss
