#include "optoloss/cat.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "optoloss/csv.hpp"
#include "optoloss/error.hpp"

namespace optoloss {

double CatSpec::g0() const { return components_to_coupling(components); }

double components_to_coupling(int k) {
  switch (k) {
    case 2:
      return 0.5;
    case 3:
      return 1.0 / std::sqrt(6.0);
    case 4:
      return 1.0 / (2.0 * std::numbers::sqrt2);
    default:
      throw DomainError("cat component count must be 2, 3 or 4");
  }
}

Vector ideal_cat_state(cplx alpha, double g0, int n, double leak_tol) {
  if (!std::isfinite(g0)) throw DomainError("g0 must be finite");
  Vector psi = coherent_state(alpha, n, leak_tol);
  const double g2 = g0 * g0;
  for (int k = 0; k < n; ++k) {
    // Reduce k^2 g0^2 mod 1 before scaling by 2 pi to keep the phase exact.
    const double frac = std::fmod(g2 * double(k) * double(k), 1.0);
    psi(k) *= std::polar(1.0, 2.0 * std::numbers::pi * frac);
  }
  if (std::abs(psi(0)) > 0.0) psi *= std::conj(psi(0)) / std::abs(psi(0));
  return psi;
}

Matrix noisy_cat_density(cplx alpha, double g0, double kappa, const FockDims& dims,
                         const EvolveConfig& cfg) {
  dims.validate();
  EvolveConfig full = cfg;
  full.orders.clear();
  const Vector psi = coherent_state(alpha, dims.n_cav, cfg.leak_tol);
  ProductState init{psi * psi.adjoint(), Matrix::Zero(dims.n_mech, dims.n_mech)};
  init.mech(0, 0) = 1.0;
  Matrix out;
  evolve_sampled(init, CouplingProfile::constant(g0), kappa, {2.0 * std::numbers::pi}, full,
                 [&](double, const OracleSnapshot& s) { out = s.cavity_state(); });
  return out;
}

void write_cat_csv(std::ostream& os, const Vector& psi) {
  os << "n,re,im\n";
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    os << k << ',' << csv::num(psi(k).real()) << ',' << csv::num(psi(k).imag()) << '\n';
  }
}

}  // namespace optoloss
