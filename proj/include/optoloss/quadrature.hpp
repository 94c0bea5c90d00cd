#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include "optoloss/error.hpp"

namespace optoloss {

struct QuadConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_subdivisions = 1 << 14;

  void validate() const;
};

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(std::complex<double> z) { return std::abs(z); }

// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
auto gk15(F& f, double a, double b) {
  using T = std::decay_t<decltype(f(a))>;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T k = fc * kronrod_w[7];
  T g = fc * gauss_w[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kronrod_x[j];
    const T s = f(c - dx) + f(c + dx);
    k += s * kronrod_w[j];
    if (j % 2 == 1) g += s * gauss_w[j / 2];
  }
  return std::pair<T, double>{k * h, magnitude((k - g) * h)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7,15). Complex integrands share one set of
// subdivision points and one error estimate.
template <class F>
auto integrate(F&& f, double a, double b, const QuadConfig& cfg = {})
    -> QuadResult<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  struct Piece {
    double a, b;
    T value;
    double error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  QuadResult<T> out;
  if (a == b) return out;
  cfg.validate();

  std::priority_queue<Piece> heap;
  auto [v0, e0] = detail::gk15(f, a, b);
  heap.push({a, b, v0, e0});
  T total = v0;
  double err = e0;
  int count = 1;
  while (err > std::max(cfg.abs_tol, cfg.rel_tol * detail::magnitude(total))) {
    if (count >= cfg.max_subdivisions) {
      throw ConvergenceError("adaptive quadrature exceeded " +
                                 std::to_string(cfg.max_subdivisions) + " subdivisions",
                             err);
    }
    Piece p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      throw ConvergenceError("adaptive quadrature hit interval resolution limit", err);
    }
    auto [vl, el] = detail::gk15(f, p.a, mid);
    auto [vr, er] = detail::gk15(f, mid, p.b);
    total += vl + vr - p.value;
    err += el + er - p.error;
    heap.push({p.a, mid, vl, el});
    heap.push({mid, p.b, vr, er});
    ++count;
  }
  // Resum to shed the drift of the running updates.
  total = T{};
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = err;
  out.intervals = count;
  return out;
}

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
GaussRule gauss_legendre(int n);

}  // namespace optoloss
