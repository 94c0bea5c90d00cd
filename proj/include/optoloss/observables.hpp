#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "optoloss/coupling.hpp"
#include "optoloss/quadrature.hpp"

namespace optoloss {

struct SystemParams {
  CouplingProfile g_profile;
  double kappa = 0.0;
  // Stored for provenance only; all observables are in the frame rotating
  // with the cavity, so lab-frame <a> carries an extra exp(-i omega_ratio tau).
  double omega_ratio = 0.0;

  void validate() const;
};

struct CoherentMech {
  cplx beta{0.0, 0.0};
};
struct ThermalMech {
  double nbar = 0.0;
};

struct InitialState {
  cplx alpha{1.0, 0.0};
  std::variant<CoherentMech, ThermalMech> mech = CoherentMech{};

  void validate() const;
};

struct ObservableTrace {
  std::string name;
  std::vector<double> taus;
  std::vector<cplx> values;
  SystemParams params;
  InitialState init;
};

// Cutoff for the fidelity double sum, sized by the Poisson tail.
struct FidelityTruncation {
  int n_max = 0;
  QuadConfig quad;

  static FidelityTruncation for_alpha(cplx alpha, double tail = 1e-12, const QuadConfig& q = {});
};

// Poisson mass above n_max for mean |alpha|^2.
double poisson_tail(double mean, int n_max);

double photon_number(cplx alpha, double kappa, double tau);

// <a(tau)> with coherent mechanics.
cplx expect_a(const InitialState& init, const SystemParams& sys, double tau,
              const QuadConfig& quad = {});
// <a(tau)> with thermal mechanics.
cplx expect_a_thermal(const InitialState& init, const SystemParams& sys, double tau,
                      const QuadConfig& quad = {});
// Dispatches on the mechanical initial state; one kernel table serves all taus.
ObservableTrace expect_a_trace(const InitialState& init, const SystemParams& sys,
                               const std::vector<double>& taus, const QuadConfig& quad = {});
std::pair<ObservableTrace, ObservableTrace> quadrature_trace(const InitialState& init,
                                                             const SystemParams& sys,
                                                             const std::vector<double>& taus,
                                                             const QuadConfig& quad = {});

// Upper bound on |<a(tau)>|^2 that vanishes at long times.
double quadrature_decay_bound(cplx alpha, const SystemParams& sys, double tau,
                              const QuadConfig& quad = {});

double cat_fidelity(cplx alpha, double g0, double kappa, const FidelityTruncation& ft);
double cat_fidelity_series(cplx alpha, double g0, double kappa, int order_q,
                           const QuadConfig& quad = {});

struct FidelityBounds {
  double lower = 0.0;
  double upper = 0.0;
};
FidelityBounds fidelity_bounds(cplx alpha, double kappa);

// `tau,re,im` and optionally `X,P`; 17 significant digits.
void write_trace_csv(std::ostream& os, const ObservableTrace& trace, bool with_quadratures);

}  // namespace optoloss
