#include "optoloss/wigner.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <thread>

#include "optoloss/csv.hpp"
#include "optoloss/error.hpp"

namespace optoloss {

namespace {

// D(i, j) = <i| D(z) |j> for i, j < n.
void displacement_elements(cplx z, int n, Matrix& D) {
  const double r = std::abs(z);
  for (int i = 0; i < n; ++i) {
    if (r == 0.0) {
      D(i, 0) = i == 0 ? 1.0 : 0.0;
    } else {
      D(i, 0) = std::polar(std::exp(-0.5 * r * r + i * std::log(r) - 0.5 * std::lgamma(i + 1.0)),
                           i * std::arg(z));
    }
  }
  // D a^dag = (a^dag - z*) D.
  const cplx zc = std::conj(z);
  for (int j = 0; j + 1 < n; ++j) {
    const double s = 1.0 / std::sqrt(j + 1.0);
    for (int i = 0; i < n; ++i) {
      cplx v = -zc * D(i, j);
      if (i > 0) v += std::sqrt(double(i)) * D(i - 1, j);
      D(i, j + 1) = s * v;
    }
  }
}

}  // namespace

void GridAxis::validate() const {
  if (count < 2 || !(max > min)) throw DomainError("grid axis needs count >= 2 and max > min");
}

double WignerGrid::integral() const { return values.sum() * x.step() * p.step(); }

WignerGrid wigner(const Matrix& rho, const GridAxis& x, const GridAxis& p, double norm_tol,
                  int jobs) {
  x.validate();
  p.validate();
  if (rho.rows() != rho.cols() || rho.rows() < 1) throw DomainError("cavity state must be square");
  const int n = int(rho.rows());
  WignerGrid w{x, p, Eigen::MatrixXd(x.count, p.count)};
  // Parity sign folded in: rho_{mn} (-1)^m.
  Matrix rs = rho;
  for (int m = 1; m < n; m += 2) rs.row(m) *= -1.0;
  double worst_imag = 0.0;

  auto work = [&](int begin, int end, double& imag) {
    Matrix D(n, n);
    for (int i = begin; i < end; ++i) {
      for (int j = 0; j < p.count; ++j) {
        const cplx z = std::numbers::sqrt2 * cplx(x.at(i), p.at(j));
        displacement_elements(z, n, D);
        // sum_{m,n} rs(m, n) D(n, m)
        const cplx v = rs.cwiseProduct(D.transpose()).sum() / std::numbers::pi;
        imag = std::max(imag, std::abs(v.imag()));
        w.values(i, j) = v.real();
      }
    }
  };
  jobs = std::clamp(jobs, 1, x.count);
  if (jobs == 1) {
    work(0, x.count, worst_imag);
  } else {
    std::vector<std::thread> pool;
    std::vector<double> imag(jobs, 0.0);
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back(work, x.count * t / jobs, x.count * (t + 1) / jobs, std::ref(imag[t]));
    }
    for (auto& th : pool) th.join();
    for (double v : imag) worst_imag = std::max(worst_imag, v);
  }
  if (worst_imag > 1e-10) {
    throw DomainError("Wigner function has imaginary residue; density is not Hermitian");
  }
  const double total = w.integral();
  if (std::abs(total - 1.0) > norm_tol) {
    throw GridCoverageError("Wigner grid integrates to " + std::to_string(total), total);
  }
  return w;
}

double negativity_volume(const WignerGrid& w) {
  return (-w.values.array()).max(0.0).sum() * w.x.step() * w.p.step();
}

void write_wigner_csv(std::ostream& os, const WignerGrid& w) {
  os << "X,P,W\n";
  for (int i = 0; i < w.x.count; ++i)
    for (int j = 0; j < w.p.count; ++j)
      os << csv::num(w.x.at(i)) << ',' << csv::num(w.p.at(j)) << ',' << csv::num(w.values(i, j))
         << '\n';
}

void write_wigner_matrix(std::ostream& os, const WignerGrid& w) {
  os << "X\\P";
  for (int j = 0; j < w.p.count; ++j) os << ',' << csv::num(w.p.at(j));
  os << '\n';
  for (int i = 0; i < w.x.count; ++i) {
    os << csv::num(w.x.at(i));
    for (int j = 0; j < w.p.count; ++j) os << ',' << csv::num(w.values(i, j));
    os << '\n';
  }
}

}  // namespace optoloss
