#include "optoloss/oracle.hpp"

#include <numbers>

#include "optoloss/cat.hpp"

namespace optoloss {

OracleSeries oracle_series(const InitialState& init, double g0, double kappa,
                           const std::vector<double>& taus, const OracleTolerance& tol,
                           bool need_a) {
  init.validate();
  cplx beta = 0.0;
  double nbar = 0.0;
  if (auto c = std::get_if<CoherentMech>(&init.mech)) beta = c->beta;
  if (auto t = std::get_if<ThermalMech>(&init.mech)) nbar = t->nbar;
  FockDims d = suggest_dims(init.alpha, beta, nbar, g0, tol.leak);
  EvolveConfig cfg;
  cfg.leak_tol = cfg.trace_tol = tol.leak;
  cfg.orders = need_a ? std::vector<int>{0, 1} : std::vector<int>{0};
  cfg.mech_cutoffs = suggest_mech_cutoffs(init.alpha, beta, nbar, g0, d.n_cav, kappa,
                                          taus.empty() ? 0.0 : taus.back(), tol.cutoff_leak,
                                          tol.norm);
  d.n_mech = cfg.mech_cutoffs.back();

  const Vector psi = coherent_state(init.alpha, d.n_cav, tol.leak);
  ProductState rho{psi * psi.adjoint(), Matrix()};
  if (nbar > 0.0) {
    rho.mech = thermal_state(nbar, d.n_mech, tol.leak);
  } else {
    const Vector m = coherent_state(beta, d.n_mech, tol.leak);
    rho.mech = m * m.adjoint();
  }
  OracleSeries out;
  out.dims = d;
  out.stats = evolve_sampled(rho, CouplingProfile::constant(g0), kappa, taus, cfg,
                             [&](double, const OracleSnapshot& s) {
                               if (need_a) out.a.push_back(s.expect_a());
                               out.n.push_back(s.photon_number());
                             });
  return out;
}

Matrix oracle_cat_state(cplx alpha, double g0, double kappa, const OracleTolerance& tol) {
  const double two_pi = 2.0 * std::numbers::pi;
  FockDims d = suggest_dims(alpha, 0.0, 0.0, g0, tol.leak);
  if (kappa == 0.0) {
    const Vector psi = ideal_cat_state(alpha, g0, d.n_cav, tol.leak);
    return psi * psi.adjoint();
  }
  EvolveConfig cfg;
  cfg.leak_tol = cfg.trace_tol = tol.leak;
  cfg.mech_cutoffs = suggest_mech_cutoffs(alpha, 0.0, 0.0, g0, d.n_cav, kappa, two_pi,
                                          tol.cutoff_leak, tol.norm);
  d.n_mech = cfg.mech_cutoffs.back();
  return noisy_cat_density(alpha, g0, kappa, d, cfg);
}

double oracle_cat_fidelity(cplx alpha, double g0, double kappa, const OracleTolerance& tol) {
  const Matrix rho = oracle_cat_state(alpha, g0, kappa, tol);
  return state_fidelity(ideal_cat_state(alpha, g0, int(rho.rows()), tol.leak), rho);
}

}  // namespace optoloss
