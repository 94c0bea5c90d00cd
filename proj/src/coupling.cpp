#include "optoloss/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "optoloss/error.hpp"

namespace optoloss {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

// Fritsch-Butland slopes, the PCHIP choice.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0), h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    del[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = del[0];
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] > 0.0) {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return s;
  };
  d[0] = end_slope(h[0], h[1], del[0], del[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  return d;
}

double hermite(double t, double h, double y0, double y1, double d0, double d1) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

// Cumulative integral of f at nodes k*h, k = 0..n.
template <class F>
std::vector<double> cumulative(F&& f, double h, int n, const QuadConfig& cfg) {
  std::vector<double> c(n + 1, 0.0);
  for (int k = 0; k < n; ++k) c[k + 1] = c[k] + integrate(f, k * h, (k + 1) * h, cfg).value;
  return c;
}

struct InnerTable {
  double h;
  std::vector<double> c;  // int_0^t g cos at nodes
  const CouplingProfile* p;
  double operator()(double t) const {
    const int n = static_cast<int>(c.size()) - 1;
    int k = std::min(n - 1, std::max(0, static_cast<int>(t / h)));
    const double a = k * h, b = a + h;
    return hermite((t - a) / h, h, c[k], c[k + 1], (*p)(a) * std::cos(a), (*p)(b) * std::cos(b));
  }
};

InnerTable make_inner(const CouplingProfile& p, double tau, int n, const QuadConfig& cfg) {
  const double h = tau / n;
  auto gc = [&](double t) { return p(t) * std::cos(t); };
  return {h, cumulative(gc, h, n, cfg), &p};
}

}  // namespace

CouplingProfile CouplingProfile::constant(double g0) {
  require_finite(g0, "coupling g0");
  CouplingProfile p;
  p.kind_ = Constant{g0};
  return p;
}

CouplingProfile CouplingProfile::tabulated(std::vector<double> tau, std::vector<double> g) {
  if (tau.size() != g.size()) throw DomainError("tabulated profile: tau and g lengths differ");
  if (tau.size() < 2) throw DomainError("tabulated profile needs at least two samples");
  for (std::size_t i = 0; i < tau.size(); ++i) {
    require_finite(tau[i], "profile tau");
    require_finite(g[i], "profile g");
    if (i > 0 && !(tau[i] > tau[i - 1])) {
      throw DomainError("tabulated profile: tau samples must be strictly increasing");
    }
  }
  CouplingProfile p;
  auto slope = pchip_slopes(tau, g);
  p.kind_ = Tabulated{std::move(tau), std::move(g), std::move(slope)};
  return p;
}

CouplingProfile CouplingProfile::callback(std::function<double(double)> fn) {
  if (!fn) throw DomainError("callback profile needs a callable");
  CouplingProfile p;
  p.kind_ = Callback{std::move(fn)};
  return p;
}

double CouplingProfile::operator()(double tau) const {
  if (auto c = std::get_if<Constant>(&kind_)) return c->g0;
  if (auto cb = std::get_if<Callback>(&kind_)) {
    const double v = cb->fn(tau);
    if (!std::isfinite(v)) throw DomainError("callback profile returned a non-finite value");
    return v;
  }
  const auto& t = std::get<Tabulated>(kind_);
  // Tolerate roundoff at the ends of the window.
  const double span = t.tau.back() - t.tau.front();
  if (tau < t.tau.front() - 1e-12 * span || tau > t.tau.back() + 1e-12 * span) {
    throw DomainError("tau = " + std::to_string(tau) + " outside tabulated profile");
  }
  tau = std::clamp(tau, t.tau.front(), t.tau.back());
  auto it = std::upper_bound(t.tau.begin(), t.tau.end(), tau);
  std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - t.tau.begin(), 1) - 1,
                                        t.tau.size() - 2);
  const double h = t.tau[k + 1] - t.tau[k];
  return hermite((tau - t.tau[k]) / h, h, t.g[k], t.g[k + 1], t.slope[k], t.slope[k + 1]);
}

double CouplingProfile::constant_value() const {
  if (auto c = std::get_if<Constant>(&kind_)) return c->g0;
  throw DomainError("operation requires a constant coupling profile");
}

void CouplingProfile::require_window(double tau_end) const {
  if (auto t = std::get_if<Tabulated>(&kind_)) {
    const double span = t->tau.back() - t->tau.front();
    if (t->tau.front() > 1e-12 * span || tau_end > t->tau.back() + 1e-12 * span) {
      throw DomainError("tabulated profile does not cover [0, " + std::to_string(tau_end) + "]");
    }
  }
}

std::string CouplingProfile::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (auto c = std::get_if<Constant>(&kind_)) {
    os << "constant(" << c->g0 << ")";
  } else if (auto t = std::get_if<Tabulated>(&kind_)) {
    os << "tabulated(" << t->tau.size() << " samples on [" << t->tau.front() << ","
       << t->tau.back() << "])";
  } else {
    os << "callback";
  }
  return os.str();
}

CouplingProfile read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open profile file " + path);
  std::string line;
  if (!std::getline(in, line)) throw DomainError(path + ": empty profile file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line != "tau,g") throw DomainError(path + ": expected header `tau,g`, got `" + line + "`");
  std::vector<double> tau, g;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected two columns");
    }
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      tau.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument(a);
      g.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::exception&) {
      throw DomainError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return CouplingProfile::tabulated(std::move(tau), std::move(g));
}

FCoeffs f_coeffs_constant(double g0, double tau) {
  require_finite(g0, "g0");
  require_finite(tau, "tau");
  if (tau < 0.0) throw DomainError("tau must be non-negative");
  return {tau, 0.5 * g0 * g0 * (std::sin(2.0 * tau) - 2.0 * tau), -g0 * std::sin(tau),
          g0 * (std::cos(tau) - 1.0)};
}

FCoeffs f_coeffs_general(const CouplingProfile& p, double tau, const QuadConfig& cfg) {
  require_finite(tau, "tau");
  if (tau < 0.0) throw DomainError("tau must be non-negative");
  cfg.validate();
  p.require_window(tau);
  FCoeffs fc{tau, 0.0, 0.0, 0.0};
  if (tau == 0.0) return fc;

  fc.f_plus = -integrate([&](double t) { return p(t) * std::cos(t); }, 0.0, tau, cfg).value;
  fc.f_minus = -integrate([&](double t) { return p(t) * std::sin(t); }, 0.0, tau, cfg).value;

  double prev = 0.0;
  double change = 0.0;
  for (int n = 16; n <= cfg.max_subdivisions; n *= 2) {
    const InnerTable inner = make_inner(p, tau, n, cfg);
    const double fa =
        -2.0 * integrate([&](double t) { return p(t) * std::sin(t) * inner(t); }, 0.0, tau, cfg)
                   .value;
    change = std::abs(fa - prev);
    if (n > 16 && change <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(fa))) {
      fc.f_a = fa;
      return fc;
    }
    prev = fa;
  }
  throw ConvergenceError("F_a inner table did not stabilise", change);
}

KernelTable::KernelTable(const CouplingProfile& profile, double tau_max, const QuadConfig& cfg)
    : profile_(profile), tau_max_(tau_max) {
  require_finite(tau_max, "tau_max");
  if (tau_max < 0.0) throw DomainError("tau_max must be non-negative");
  cfg.validate();
  if (profile.is_constant() || tau_max == 0.0) return;
  profile.require_window(tau_max);

  // Hermite interpolation error scales as h^4; h = 1/128 keeps it near 1e-11.
  const int n = std::max(8, static_cast<int>(std::ceil(tau_max * 128.0)));
  h_ = tau_max / n;
  const auto& p = profile_;
  fp_ = cumulative([&](double t) { return -p(t) * std::cos(t); }, h_, n, cfg);
  fm_ = cumulative([&](double t) { return -p(t) * std::sin(t); }, h_, n, cfg);
  auto fp_at = [&](double t) {
    const int k = std::min(n - 1, std::max(0, static_cast<int>(t / h_)));
    const double a = k * h_, b = a + h_;
    return hermite((t - a) / h_, h_, fp_[k], fp_[k + 1], -p(a) * std::cos(a),
                   -p(b) * std::cos(b));
  };
  fa_ = cumulative([&](double t) { return 2.0 * p(t) * std::sin(t) * fp_at(t); }, h_, n, cfg);
}

FCoeffs KernelTable::at(double tau) const {
  if (tau < 0.0 || tau > tau_max_ * (1.0 + 1e-12) + 1e-300) {
    throw DomainError("tau outside kernel table window");
  }
  if (profile_.is_constant()) return f_coeffs_constant(profile_.constant_value(), tau);
  if (tau == 0.0) return {0.0, 0.0, 0.0, 0.0};
  const int n = static_cast<int>(fa_.size()) - 1;
  const int k = std::min(n - 1, std::max(0, static_cast<int>(tau / h_)));
  const double a = k * h_, b = a + h_;
  const double t = (tau - a) / h_;
  const double ga = profile_(a), gb = profile_(std::min(b, tau_max_));
  const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
  FCoeffs fc;
  fc.tau = tau;
  fc.f_plus = hermite(t, h_, fp_[k], fp_[k + 1], -ga * ca, -gb * cb);
  fc.f_minus = hermite(t, h_, fm_[k], fm_[k + 1], -ga * sa, -gb * sb);
  fc.f_a = hermite(t, h_, fa_[k], fa_[k + 1], 2.0 * ga * sa * fp_[k], 2.0 * gb * sb * fp_[k + 1]);
  return fc;
}

}  // namespace optoloss
