#include <algorithm>
#include <cmath>
#include <optional>

#include "block_state.hpp"
#include "optoloss/error.hpp"

namespace optoloss {

using detail::BlockLayout;
using detail::BlockState;

const FockDims& OracleSnapshot::dims() const { return s_->layout().dims(); }
bool OracleSnapshot::has_order(int k) const { return s_->layout().has_order(k); }
cplx OracleSnapshot::expect_a() const { return s_->expect_a(); }
double OracleSnapshot::photon_number() const { return s_->photon_number(); }
double OracleSnapshot::trace() const { return s_->trace(); }
Matrix OracleSnapshot::cavity_state() const { return s_->cavity_state(); }
DensityMatrix OracleSnapshot::density() const { return s_->density(); }
double OracleSnapshot::mech_edge_population() const { return s_->mech_edge_population(); }

void EvolveConfig::validate() const {
  if (auto f = std::get_if<FixedRK4>(&method); f && !std::isfinite(f->dt)) {
    throw DomainError("RK4 step must be finite");
  }
  if (auto a = std::get_if<AdaptiveRK>(&method); a && !(a->rtol > 0.0 && a->atol > 0.0)) {
    throw DomainError("adaptive tolerances must be positive");
  }
  if (!(leak_tol > 0.0) || !(trace_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (rehermitize_every < 1) throw DomainError("rehermitize_every must be positive");
}

namespace {

using Blocks = std::vector<Matrix>;

void axpy(Blocks& y, cplx a, const Blocks& x) {
  for (std::size_t p = 0; p < y.size(); ++p) y[p] += a * x[p];
}

class Runner {
 public:
  Runner(const FockDims& dims, const CouplingProfile& g, double kappa, const EvolveConfig& cfg)
      : layout_(dims, cfg.orders, cfg.mech_cutoffs),
        state_(layout_),
        g_(g),
        kappa_(kappa),
        cfg_(cfg) {
    cfg.validate();
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be non-negative");
    if (std::holds_alternative<EvolveConfig::Chebyshev>(cfg.method) && !g.is_constant()) {
      throw DomainError("Chebyshev propagation needs constant coupling; use an RK method");
    }
    std::size_t copies = 3;
    if (std::holds_alternative<EvolveConfig::FixedRK4>(cfg.method)) copies = 4;
    if (std::holds_alternative<EvolveConfig::AdaptiveRK>(cfg.method)) copies = 10;
    cfg.budget.require(copies * layout_.bytes_per_state(), "oracle state");
  }

  BlockState& state() { return state_; }

  void start() {
    has_trace_ = layout_.has_order(0);
    trace0_ = has_trace_ ? state_.trace() : 0.0;
    stats_.trace_drift = has_trace_ ? 0.0 : NAN;
    track();
  }

  void advance(double tau_to) {
    if (tau_to <= tau_) return;
    std::visit([&](const auto& m) { step_to(m, tau_to); }, cfg_.method);
    tau_ = tau_to;
  }

  EvolveStats finish() {
    if (has_trace_) {
      stats_.trace_drift = std::abs(state_.trace() - trace0_);
      if (stats_.trace_drift > cfg_.trace_tol) {
        throw ConvergenceError("oracle trace drifted by " + std::to_string(stats_.trace_drift),
                               stats_.trace_drift);
      }
    }
    if (stats_.mech_leak > cfg_.leak_tol || stats_.cavity_leak > cfg_.leak_tol) {
      const FockDims& d = layout_.dims();
      const int sc = stats_.cavity_leak > cfg_.leak_tol ? d.n_cav + 4 : d.n_cav;
      const int sm = stats_.mech_leak > cfg_.leak_tol ? int(d.n_mech * 1.5) + 10 : d.n_mech;
      throw TruncationError("Fock truncation leak: mechanics " + std::to_string(stats_.mech_leak) +
                                ", cavity " + std::to_string(stats_.cavity_leak) + " (tolerance " +
                                std::to_string(cfg_.leak_tol) + ")",
                            sc, sm);
    }
    return stats_;
  }

 private:
  void track() {
    stats_.mech_leak = std::max(stats_.mech_leak, state_.mech_edge_population());
    stats_.cavity_leak = std::max(stats_.cavity_leak, state_.cavity_edge_population());
  }

  void after_step() {
    ++stats_.steps;
    if (has_trace_ && stats_.steps % cfg_.rehermitize_every == 0) state_.rehermitize();
    track();
  }

  double max_abs_g(double a, double b) const {
    if (g_.is_constant()) return std::abs(g_.constant_value());
    double m = 0.0;
    for (int i = 0; i <= 64; ++i) m = std::max(m, std::abs(g_(a + (b - a) * i / 64.0)));
    return m;
  }

  double heuristic_dt(double a, double b) const {
    const FockDims& d = layout_.dims();
    const double gmax = max_abs_g(a, b);
    const detail::SpectralBox box = detail::spectral_box(layout_, gmax, kappa_);
    const double dt = 0.1 / (gmax * d.n_cav + kappa_ * d.n_cav + d.n_mech);
    const double radius = std::hypot(box.half_width, std::abs(box.center) + box.real_radius);
    return std::min(dt, 2.0 / radius);
  }

  void rhs(double t, const Blocks& x, Blocks& y) const {
    detail::apply_affine(layout_, g_(t), kappa_, 0.0, 1.0, x, 0.0, nullptr, y);
  }

  void step_to(const EvolveConfig::Chebyshev&, double tau_to) {
    const double g = g_.constant_value();
    if (!box_) box_ = detail::spectral_box(layout_, g, kappa_);
    const double W = box_->half_width;
    const double delta = box_->real_radius / W;
    // Keep the growth of T_k off the unit interval, ~exp(omega sqrt(2 delta)),
    // near roundoff.
    const double omega_max = delta > 0.0 ? std::min(400.0, 6.0 / std::sqrt(delta)) : 400.0;
    const double span = tau_to - tau_;
    const long n = std::max<long>(1, long(std::ceil(span * W / omega_max)));
    const double h = span / n;
    const double omega = h * W;
    std::vector<cplx> coef;
    for (int k = 0;; ++k) {
      const double J = std::cyl_bessel_j(double(k), omega);
      cplx ik = std::pow(cplx(0.0, 1.0), k);
      coef.push_back((k == 0 ? 1.0 : 2.0) * ik * J);
      if (k > omega + 5 && std::abs(J) < 1e-18) break;
    }
    const double c = box_->center;
    const cplx scale = std::exp(h * c);
    Blocks cur = state_.blocks(), acc = state_.blocks();
    for (long step = 0; step < n; ++step) {
      Blocks& prev = state_.blocks();
      for (std::size_t p = 0; p < acc.size(); ++p) acc[p] = coef[0] * prev[p];
      detail::apply_affine(layout_, g, kappa_, c, cplx(0.0, -1.0 / W), prev, 0.0, nullptr, cur,
                           coef[1], &acc);
      for (std::size_t k = 2; k < coef.size(); ++k) {
        // T_k = -2i/W (L - c) T_{k-1} - T_{k-2}, written over T_{k-2}.
        detail::apply_affine(layout_, g, kappa_, c, cplx(0.0, -2.0 / W), cur, -1.0, &prev, prev,
                             coef[k], &acc);
        std::swap(prev, cur);
      }
      for (std::size_t p = 0; p < acc.size(); ++p) state_.blocks()[p] = scale * acc[p];
      after_step();
    }
  }

  void step_to(const EvolveConfig::FixedRK4& m, double tau_to) {
    const double span = tau_to - tau_;
    const double dt = m.dt > 0.0 ? m.dt : heuristic_dt(tau_, tau_to);
    const long n = std::max<long>(1, long(std::ceil(span / dt - 1e-9)));
    const double h = span / n;
    Blocks k = state_.blocks(), tmp = k, acc = k;
    Blocks& y = state_.blocks();
    for (long s = 0; s < n; ++s) {
      const double t = tau_ + s * h;
      rhs(t, y, k);
      acc = y;
      axpy(acc, h / 6.0, k);
      tmp = y;
      axpy(tmp, h / 2.0, k);
      rhs(t + h / 2.0, tmp, k);
      axpy(acc, h / 3.0, k);
      tmp = y;
      axpy(tmp, h / 2.0, k);
      rhs(t + h / 2.0, tmp, k);
      axpy(acc, h / 3.0, k);
      tmp = y;
      axpy(tmp, h, k);
      rhs(t + h, tmp, k);
      axpy(acc, h / 6.0, k);
      std::swap(y, acc);
      after_step();
    }
  }

  void step_to(const EvolveConfig::AdaptiveRK& m, double tau_to) {
    // Dormand-Prince 5(4) with FSAL.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    Blocks& y = state_.blocks();
    Blocks k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y;
    double t = tau_;
    double h = h_adapt_ > 0.0 ? h_adapt_ : 10.0 * heuristic_dt(tau_, tau_to);
    rhs(t, y, k1);
    while (t < tau_to) {
      const bool last = t + h >= tau_to;
      if (last) h = tau_to - t;
      auto stage = [&](std::initializer_list<std::pair<double, const Blocks*>> terms) {
        tmp = y;
        for (auto [w, k] : terms) axpy(tmp, h * w, *k);
      };
      stage({{a21, &k1}});
      rhs(t + c2 * h, tmp, k2);
      stage({{a31, &k1}, {a32, &k2}});
      rhs(t + c3 * h, tmp, k3);
      stage({{a41, &k1}, {a42, &k2}, {a43, &k3}});
      rhs(t + c4 * h, tmp, k4);
      stage({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
      rhs(t + c5 * h, tmp, k5);
      stage({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
      rhs(t + h, tmp, k6);
      stage({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      rhs(t + h, tmp, k7);
      double err = 0.0;
      for (std::size_t p = 0; p < y.size(); ++p) {
        const Matrix e =
            h * (e1 * k1[p] + e3 * k3[p] + e4 * k4[p] + e5 * k5[p] + e6 * k6[p] + e7 * k7[p]);
        const Eigen::ArrayXXd sc =
            m.atol + m.rtol * y[p].cwiseAbs().array().max(tmp[p].cwiseAbs().array());
        err = std::max(err, (e.cwiseAbs().array() / sc).maxCoeff());
      }
      if (err <= 1.0) {
        t = last ? tau_to : t + h;
        std::swap(y, tmp);
        std::swap(k1, k7);
        after_step();
      }
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (!(last && err <= 1.0)) h *= fac;
      if (h < 1e-12 * std::max(1.0, tau_to)) {
        throw ConvergenceError("adaptive RK step size underflow", h);
      }
      if (err <= 1.0 && !last) h_adapt_ = h;
    }
  }

  BlockLayout layout_;
  BlockState state_;
  const CouplingProfile& g_;
  double kappa_;
  EvolveConfig cfg_;
  EvolveStats stats_;
  double tau_ = 0.0;
  double trace0_ = 0.0;
  bool has_trace_ = false;
  double h_adapt_ = 0.0;
  std::optional<detail::SpectralBox> box_;
};

void check_taus(const std::vector<double>& taus) {
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] >= 0.0) || !std::isfinite(taus[i])) throw DomainError("taus must be >= 0");
    if (i > 0 && !(taus[i] > taus[i - 1])) throw DomainError("taus must be strictly increasing");
  }
}

template <class Init>
EvolveStats run_sampled(const Init& rho0, const FockDims& dims, const CouplingProfile& g,
                        double kappa, const std::vector<double>& taus, const EvolveConfig& cfg,
                        const SampleObserver& observer) {
  check_taus(taus);
  if (!taus.empty()) g.require_window(taus.back());
  Runner r(dims, g, kappa, cfg);
  r.state().load(rho0);
  r.start();
  for (double t : taus) {
    r.advance(t);
    if (observer) observer(t, OracleSnapshot(r.state()));
  }
  return r.finish();
}

}  // namespace

EvolveStats evolve_sampled(const DensityMatrix& rho0, const CouplingProfile& g, double kappa,
                           const std::vector<double>& taus, const EvolveConfig& cfg,
                           const SampleObserver& observer) {
  return run_sampled(rho0, rho0.dims, g, kappa, taus, cfg, observer);
}

EvolveStats evolve_sampled(const ProductState& rho0, const CouplingProfile& g, double kappa,
                           const std::vector<double>& taus, const EvolveConfig& cfg,
                           const SampleObserver& observer) {
  const FockDims dims{int(rho0.cav.rows()), int(rho0.mech.rows())};
  return run_sampled(rho0, dims, g, kappa, taus, cfg, observer);
}

DensityMatrix evolve(const DensityMatrix& rho0, const CouplingProfile& g, double kappa,
                     double tau_end, const EvolveConfig& cfg, EvolveStats* stats) {
  if (!cfg.orders.empty() && int(cfg.orders.size()) < rho0.dims.n_cav) {
    throw DomainError("evolve returns a full density matrix; use evolve_sampled for order subsets");
  }
  DensityMatrix out;
  const EvolveStats st = evolve_sampled(
      rho0, g, kappa, {tau_end}, cfg, [&](double, const OracleSnapshot& s) { out = s.density(); });
  if (stats) *stats = st;
  return out;
}

}  // namespace optoloss
