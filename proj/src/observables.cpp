#include "optoloss/observables.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "optoloss/csv.hpp"
#include "optoloss/error.hpp"

namespace optoloss {

namespace {

constexpr cplx I{0.0, 1.0};

void require_nonneg(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError(std::string(what) + " must be finite and non-negative");
  }
}

// Everything in the exponent of <a>/alpha except the mechanics-dependent
// G factor.
cplx common_exponent(double n_alpha, double kappa, double tau, const KernelTable& kt,
                     const QuadConfig& quad) {
  const FCoeffs f = kt.at(tau);
  const double A = phase_A(f);
  const cplx G = displacement_G(f);
  cplx e = n_alpha * (std::exp(-2.0 * I * A - kappa * tau) - 1.0) - I * A - 0.5 * kappa * tau;
  if (kappa > 0.0 && n_alpha > 0.0 && tau > 0.0) {
    auto integrand = [&](double t) {
      const FCoeffs ft = kt.at(t);
      const double B = interference_B(G, displacement_G(ft));
      return std::exp(-kappa * t + I * (B - 2.0 * phase_A(ft)));
    };
    e += kappa * n_alpha * integrate(integrand, 0.0, tau, quad).value;
  }
  return e;
}

cplx mean_a(const InitialState& init, const SystemParams& sys, double tau, const KernelTable& kt,
            const QuadConfig& quad) {
  require_nonneg(tau, "tau");
  const cplx G = displacement_G(kt.at(tau));
  cplx e = common_exponent(std::norm(init.alpha), sys.kappa, tau, kt, quad);
  if (auto c = std::get_if<CoherentMech>(&init.mech)) {
    e += -0.5 * std::norm(G) + G * std::conj(c->beta) - std::conj(G) * c->beta;
  } else {
    const double nbar = std::get<ThermalMech>(init.mech).nbar;
    e += -0.5 * std::norm(G) * (1.0 + 2.0 * nbar);
  }
  return init.alpha * std::exp(e);
}

double log_poisson(double mean, int n) {
  if (mean == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return -mean + n * std::log(mean) - std::lgamma(n + 1.0);
}

}  // namespace

void SystemParams::validate() const {
  require_nonneg(kappa, "kappa");
  require_nonneg(omega_ratio, "omega_ratio");
}

void InitialState::validate() const {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw DomainError("alpha must be finite");
  }
  if (auto t = std::get_if<ThermalMech>(&mech)) require_nonneg(t->nbar, "nbar");
  if (auto c = std::get_if<CoherentMech>(&mech)) {
    if (!std::isfinite(std::abs(c->beta))) throw DomainError("beta must be finite");
  }
}

double poisson_tail(double mean, int n_max) {
  double tail = 0.0;
  for (int n = n_max + 1;; ++n) {
    const double p = std::exp(log_poisson(mean, n));
    tail += p;
    if (n > mean && p < 1e-18 * std::max(tail, 1e-300)) break;
    if (p == 0.0 && n > mean) break;
  }
  return tail;
}

FidelityTruncation FidelityTruncation::for_alpha(cplx alpha, double tail, const QuadConfig& q) {
  const double mean = std::norm(alpha);
  FidelityTruncation ft;
  ft.quad = q;
  ft.n_max = 1;
  while (poisson_tail(mean, ft.n_max) >= tail) ++ft.n_max;
  return ft;
}

double photon_number(cplx alpha, double kappa, double tau) {
  require_nonneg(kappa, "kappa");
  require_nonneg(tau, "tau");
  return std::norm(alpha) * std::exp(-kappa * tau);
}

cplx expect_a(const InitialState& init, const SystemParams& sys, double tau,
              const QuadConfig& quad) {
  init.validate();
  sys.validate();
  if (!std::holds_alternative<CoherentMech>(init.mech)) {
    throw DomainError("expect_a needs coherent mechanics; use expect_a_thermal");
  }
  require_nonneg(tau, "tau");
  return mean_a(init, sys, tau, KernelTable(sys.g_profile, tau, quad), quad);
}

cplx expect_a_thermal(const InitialState& init, const SystemParams& sys, double tau,
                      const QuadConfig& quad) {
  init.validate();
  sys.validate();
  if (!std::holds_alternative<ThermalMech>(init.mech)) {
    throw DomainError("expect_a_thermal needs thermal mechanics");
  }
  require_nonneg(tau, "tau");
  return mean_a(init, sys, tau, KernelTable(sys.g_profile, tau, quad), quad);
}

ObservableTrace expect_a_trace(const InitialState& init, const SystemParams& sys,
                               const std::vector<double>& taus, const QuadConfig& quad) {
  init.validate();
  sys.validate();
  for (std::size_t i = 0; i < taus.size(); ++i) {
    require_nonneg(taus[i], "tau");
    if (i > 0 && !(taus[i] > taus[i - 1])) throw DomainError("taus must be strictly increasing");
  }
  ObservableTrace tr{"a", taus, {}, sys, init};
  if (taus.empty()) return tr;
  const KernelTable kt(sys.g_profile, taus.back(), quad);
  tr.values.reserve(taus.size());
  for (double t : taus) tr.values.push_back(mean_a(init, sys, t, kt, quad));
  return tr;
}

std::pair<ObservableTrace, ObservableTrace> quadrature_trace(const InitialState& init,
                                                             const SystemParams& sys,
                                                             const std::vector<double>& taus,
                                                             const QuadConfig& quad) {
  const ObservableTrace a = expect_a_trace(init, sys, taus, quad);
  ObservableTrace x{"X", taus, {}, sys, init}, p{"P", taus, {}, sys, init};
  for (const cplx& v : a.values) {
    x.values.emplace_back(std::numbers::sqrt2 * v.real(), 0.0);
    p.values.emplace_back(std::numbers::sqrt2 * v.imag(), 0.0);
  }
  return {x, p};
}

double quadrature_decay_bound(cplx alpha, const SystemParams& sys, double tau,
                              const QuadConfig& quad) {
  sys.validate();
  require_nonneg(tau, "tau");
  const FCoeffs f = sys.g_profile.is_constant()
                        ? f_coeffs_constant(sys.g_profile.constant_value(), tau)
                        : f_coeffs_general(sys.g_profile, tau, quad);
  const double n = std::norm(alpha);
  const double decay = std::exp(-sys.kappa * tau);
  const double A = phase_A(f);
  return n * std::exp(2.0 * n * std::cos(2.0 * A) * decay - std::norm(displacement_G(f)) -
                      sys.kappa * tau - 2.0 * n * decay);
}

double cat_fidelity(cplx alpha, double g0, double kappa, const FidelityTruncation& ft) {
  require_nonneg(kappa, "kappa");
  if (!std::isfinite(g0)) throw DomainError("g0 must be finite");
  const double mean = std::norm(alpha);
  const double tail = poisson_tail(mean, ft.n_max);
  if (tail >= 1e-12) {
    throw TruncationError("fidelity cutoff n_max = " + std::to_string(ft.n_max) +
                              " leaves Poisson tail " + std::to_string(tail),
                          FidelityTruncation::for_alpha(alpha).n_max);
  }
  const int n = ft.n_max;
  std::vector<double> w(n + 1);
  for (int k = 0; k <= n; ++k) w[k] = std::exp(log_poisson(mean, k) - kappa * std::numbers::pi * k);

  // Loss integral depends only on k = n - n'; I(-k) = conj(I(k)).
  std::vector<cplx> expo(n + 1, cplx{1.0, 0.0});
  if (kappa > 0.0 && mean > 0.0) {
    for (int k = 0; k <= n; ++k) {
      auto integrand = [&](double t) {
        const double A = phase_A(f_coeffs_constant(g0, t));
        return std::exp(-kappa * t - 2.0 * I * A * double(k));
      };
      const cplx Ik = integrate(integrand, 0.0, 2.0 * std::numbers::pi, ft.quad).value;
      expo[k] = std::exp(kappa * mean * Ik);
    }
  }
  cplx F = 0.0;
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) {
      const cplx e = a >= b ? expo[a - b] : std::conj(expo[b - a]);
      F += w[a] * w[b] * e;
    }
  }
  if (std::abs(F.imag()) > 1e-10) {
    throw ConvergenceError("fidelity has imaginary residue", std::abs(F.imag()));
  }
  return F.real();
}

double cat_fidelity_series(cplx alpha, double g0, double kappa, int order_q,
                           const QuadConfig& quad) {
  require_nonneg(kappa, "kappa");
  if (order_q < 1 || order_q > 3) throw DomainError("series order must be 1, 2 or 3");
  quad.validate();
  const double mean = std::norm(alpha);
  const double x = std::exp(-std::numbers::pi * kappa);
  const double pref = std::exp(-2.0 * mean * (1.0 - x));
  if (kappa == 0.0 || mean == 0.0) return pref;

  auto A = [&](double t) { return g0 * g0 * (std::sin(t) - t); };
  // Tensor-product Gauss-Legendre over [0, 2pi]^q; the rule order doubles
  // until the q-th integral is stable.
  auto order_integral = [&](int q, int m) {
    const GaussRule r = gauss_legendre(m);
    std::vector<double> t(m), wt(m), at(m);
    for (int i = 0; i < m; ++i) {
      t[i] = std::numbers::pi * (r.x[i] + 1.0);
      wt[i] = std::numbers::pi * r.w[i] * std::exp(-kappa * t[i]);
      at[i] = A(t[i]);
    }
    auto f = [&](double sumA) {
      const double s = std::sin(sumA);
      return std::exp(-4.0 * mean * x * s * s);
    };
    double acc = 0.0;
    if (q == 1) {
      for (int i = 0; i < m; ++i) acc += wt[i] * f(at[i]);
    } else if (q == 2) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) acc += wt[i] * wt[j] * f(at[i] + at[j]);
    } else {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double inner = 0.0;
          for (int k = 0; k < m; ++k) inner += wt[k] * f(at[i] + at[j] + at[k]);
          acc += wt[i] * wt[j] * inner;
        }
    }
    return acc;
  };

  double sum = 1.0;
  double coeff = 1.0;
  for (int q = 1; q <= order_q; ++q) {
    coeff *= kappa * mean / q;
    const int m_cap = q == 3 ? 256 : 2048;
    double prev = order_integral(q, 16);
    double val = prev;
    double change = INFINITY;
    for (int m = 32; m <= m_cap; m *= 2) {
      val = order_integral(q, m);
      change = std::abs(val - prev);
      if (change <= std::max(quad.abs_tol, quad.rel_tol * std::abs(val))) break;
      prev = val;
    }
    if (change > std::max(quad.abs_tol, quad.rel_tol * std::abs(val))) {
      throw ConvergenceError("series integral of order " + std::to_string(q) + " not converged",
                             change);
    }
    sum += coeff * val;
  }
  return pref * sum;
}

FidelityBounds fidelity_bounds(cplx alpha, double kappa) {
  require_nonneg(kappa, "kappa");
  const double n = std::norm(alpha);
  const double x = std::exp(-std::numbers::pi * kappa);
  // 2 e^{-2n} sinh(2nx) written without overflow for large n.
  const double sh = std::exp(-2.0 * n * (1.0 - x)) - std::exp(-2.0 * n * (1.0 + x));
  return {sh + std::exp(-n * (1.0 + x) * (1.0 + x)), std::exp(-n * (1.0 - x) * (1.0 - x))};
}

void write_trace_csv(std::ostream& os, const ObservableTrace& tr, bool with_quadratures) {
  os << (with_quadratures ? "tau,re,im,X,P\n" : "tau,re,im\n");
  for (std::size_t i = 0; i < tr.taus.size(); ++i) {
    const cplx v = tr.values[i];
    os << csv::num(tr.taus[i]) << ',' << csv::num(v.real()) << ',' << csv::num(v.imag());
    if (with_quadratures) {
      os << ',' << csv::num(std::numbers::sqrt2 * v.real()) << ','
         << csv::num(std::numbers::sqrt2 * v.imag());
    }
    os << '\n';
  }
}

}  // namespace optoloss
