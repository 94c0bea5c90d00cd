#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "optoloss/quadrature.hpp"

namespace optoloss {

using cplx = std::complex<double>;

// Light-matter coupling g(tau) in units of the mechanical frequency.
class CouplingProfile {
 public:
  struct Constant {
    double g0;
  };
  struct Tabulated {
    std::vector<double> tau;
    std::vector<double> g;
    std::vector<double> slope;  // monotone cubic (PCHIP) derivatives
  };
  struct Callback {
    std::function<double(double)> fn;
  };

  CouplingProfile() : kind_(Constant{0.0}) {}
  static CouplingProfile constant(double g0);
  // Samples must be strictly increasing in tau; values finite.
  static CouplingProfile tabulated(std::vector<double> tau, std::vector<double> g);
  static CouplingProfile callback(std::function<double(double)> fn);

  double operator()(double tau) const;
  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
  double constant_value() const;
  // Throws DomainError unless the profile is defined on [0, tau_end].
  void require_window(double tau_end) const;
  const Tabulated* table() const { return std::get_if<Tabulated>(&kind_); }
  std::string describe() const;

 private:
  std::variant<Constant, Tabulated, Callback> kind_;
};

// Reads a two-column `tau,g` CSV into a tabulated profile.
CouplingProfile read_profile_csv(const std::string& path);

struct FCoeffs {
  double tau = 0.0;
  double f_a = 0.0;
  double f_plus = 0.0;
  double f_minus = 0.0;
};

FCoeffs f_coeffs_constant(double g0, double tau);
FCoeffs f_coeffs_general(const CouplingProfile& profile, double tau, const QuadConfig& cfg = {});

inline double phase_A(const FCoeffs& fc) { return fc.f_a + fc.f_plus * fc.f_minus; }
inline cplx displacement_G(const FCoeffs& fc) { return {fc.f_minus, -fc.f_plus}; }
inline double interference_B(cplx g_tau, cplx g_tauprime) {
  return 2.0 * std::imag(g_tau * std::conj(g_tauprime));
}

// Repeated evaluation of F(tau) on [0, tau_max]. Constant profiles use the
// closed form; others a cumulative table with cubic Hermite interpolation
// whose node derivatives are exact.
class KernelTable {
 public:
  KernelTable(const CouplingProfile& profile, double tau_max, const QuadConfig& cfg = {});
  FCoeffs at(double tau) const;
  double tau_max() const { return tau_max_; }

 private:
  CouplingProfile profile_;
  double tau_max_;
  double h_ = 0.0;
  std::vector<double> fa_, fp_, fm_;
};

}  // namespace optoloss
