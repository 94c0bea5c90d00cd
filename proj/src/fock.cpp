#include "optoloss/fock.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "optoloss/csv.hpp"
#include "optoloss/error.hpp"
#include "optoloss/observables.hpp"

namespace optoloss {

namespace {

constexpr cplx I{0.0, 1.0};

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

SparseOperator sparse_kron(const SparseOperator& A, const SparseOperator& B) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(std::size_t(A.nonZeros()) * std::size_t(B.nonZeros()));
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (SparseOperator::InnerIterator ia(A, ka); ia; ++ia)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (SparseOperator::InnerIterator ib(B, kb); ib; ++ib)
          t.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(),
                         ia.value() * ib.value());
  SparseOperator out(A.rows() * B.rows(), A.cols() * B.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// exp(-i theta B) = V diag(exp(-i theta lambda)) V^dag for Hermitian B.
struct HermitianExp {
  Eigen::MatrixXcd V;
  Eigen::VectorXd lambda;
  explicit HermitianExp(const Matrix& B) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(B);
    V = es.eigenvectors();
    lambda = es.eigenvalues();
  }
  Matrix operator()(double theta) const {
    Vector ph(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) ph(i) = std::exp(-I * theta * lambda(i));
    return V * ph.asDiagonal() * V.adjoint();
  }
};

int auto_pad(double g0, const FockDims& dims) {
  const double s = std::sqrt(double(dims.n_mech)) + 2.0 * std::abs(g0) * (dims.n_cav - 1);
  return std::max(dims.n_mech, static_cast<int>(std::ceil(s * s + 10.0 * s + 20.0)));
}

// Mechanical blocks U_n of the factored propagator on mp levels.
std::vector<Matrix> factored_blocks(double g0, double tau, int n_cav, int mp) {
  const FCoeffs f = f_coeffs_constant(g0, tau);
  const Matrix b = Matrix(annihilation(mp));
  const HermitianExp ep(b + b.adjoint());
  const HermitianExp em(I * (b.adjoint() - b));
  Vector free(mp);
  for (int m = 0; m < mp; ++m) free(m) = std::exp(-I * double(m) * tau);
  std::vector<Matrix> out;
  for (int n = 0; n < n_cav; ++n) {
    out.push_back(std::exp(-I * f.f_a * double(n) * double(n)) * free.asDiagonal() *
                  ep(f.f_plus * n) * em(f.f_minus * n));
  }
  return out;
}

}  // namespace

void FockDims::validate() const {
  if (n_cav < 2 || n_mech < 2) throw DomainError("Fock cutoffs must both be at least 2");
}

void MemoryBudget::require(std::size_t need, const std::string& what) const {
  if (need > bytes) {
    throw BudgetError(what + " needs " + std::to_string(need) + " bytes; budget is " +
                      std::to_string(bytes));
  }
}

DensityMatrix DensityMatrix::pure(const FockDims& dims, const Vector& psi) {
  dims.validate();
  if (std::size_t(psi.size()) != dims.size()) throw DomainError("state size does not match dims");
  return {dims, psi * psi.adjoint()};
}

DensityMatrix DensityMatrix::product(const Matrix& rc, const Matrix& rm) {
  FockDims d{int(rc.rows()), int(rm.rows())};
  d.validate();
  if (rc.rows() != rc.cols() || rm.rows() != rm.cols()) {
    throw DomainError("density factors must be square");
  }
  return {d, kron(rc, rm)};
}

double DensityMatrix::hermiticity_error() const {
  return (data - data.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Matrix h = 0.5 * (data + data.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Tr rho^2 = sum |rho_ij|^2 for Hermitian rho.
double DensityMatrix::purity() const { return data.squaredNorm(); }

void DensityMatrix::validate(double herm_tol, double trace_tol, bool positivity,
                             double pos_tol) const {
  if (std::size_t(data.rows()) != dims.size() || data.rows() != data.cols()) {
    throw DomainError("density matrix shape does not match dims");
  }
  if (hermiticity_error() > herm_tol) throw DomainError("density matrix is not Hermitian");
  if (std::abs(trace() - 1.0) > trace_tol) throw DomainError("density matrix trace is not 1");
  if (positivity && min_eigenvalue() < -pos_tol) {
    throw DomainError("density matrix has a negative eigenvalue");
  }
}

VectorizedState vectorize(const DensityMatrix& rho) {
  const Eigen::Index n = rho.data.rows();
  VectorizedState v{rho.dims, Vector(n * n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) v.vec(i * n + j) = rho.data(i, j);
  return v;
}

DensityMatrix devectorize(const VectorizedState& v) {
  const Eigen::Index n = Eigen::Index(v.dims.size());
  if (v.vec.size() != n * n) throw DomainError("vector length does not match dims");
  DensityMatrix rho{v.dims, Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) rho.data(i, j) = v.vec(i * n + j);
  return rho;
}

int coherent_cutoff(cplx amp, double leak_tol) {
  const double mean = std::norm(amp);
  // Population of the top two levels and beyond.
  int n = 2;
  while (poisson_tail(mean, n - 3) >= leak_tol) ++n;
  return n;
}

int thermal_cutoff(double nbar, double leak_tol) {
  if (nbar <= 0.0) return 2;
  const double r = nbar / (1.0 + nbar);
  return std::max(2, static_cast<int>(std::ceil(std::log(leak_tol) / std::log(r))) + 3);
}

Vector coherent_state(cplx amp, int n, double leak_tol) {
  if (n < 1) throw DomainError("cutoff must be positive");
  const double mean = std::norm(amp);
  if (n < 2 || poisson_tail(mean, n - 2) >= leak_tol) {
    const int need = coherent_cutoff(amp, leak_tol);
    if (n < need) {
      throw TruncationError("coherent state leaks beyond " + std::to_string(n) +
                                " levels; need " + std::to_string(need),
                            need);
    }
  }
  Vector psi = Vector::Zero(n);
  if (mean == 0.0) {
    psi(0) = 1.0;
    return psi;
  }
  const double la = std::log(std::abs(amp));
  const double ph = std::arg(amp);
  for (int k = 0; k < n; ++k) {
    psi(k) = std::polar(std::exp(-0.5 * mean + k * la - 0.5 * std::lgamma(k + 1.0)), k * ph);
  }
  psi /= psi.norm();
  return psi;
}

Matrix thermal_state(double nbar, int n, double leak_tol) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw DomainError("nbar must be non-negative");
  if (n < 1) throw DomainError("cutoff must be positive");
  Matrix rho = Matrix::Zero(n, n);
  if (nbar == 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  const double r = nbar / (1.0 + nbar);
  if (std::pow(r, n - 1) >= leak_tol) {
    const int need = thermal_cutoff(nbar, leak_tol);
    throw TruncationError("thermal state leaks beyond " + std::to_string(n) + " levels; need " +
                              std::to_string(need),
                          need);
  }
  double norm = 0.0;
  for (int m = 0; m < n; ++m) {
    const double p = std::pow(r, m) / (1.0 + nbar);
    rho(m, m) = p;
    norm += p;
  }
  return rho / norm;
}

SparseOperator annihilation(int n) {
  SparseOperator a(n, n);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 1; k < n; ++k) t.emplace_back(k - 1, k, std::sqrt(double(k)));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseOperator number_op(int n) {
  SparseOperator a(n, n);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int k = 1; k < n; ++k) t.emplace_back(k, k, double(k));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseOperator identity_op(int n) {
  SparseOperator a(n, n);
  a.setIdentity();
  return a;
}

SparseOperator on_cavity(const SparseOperator& op, const FockDims& dims) {
  return sparse_kron(op, identity_op(dims.n_mech));
}

SparseOperator on_mechanics(const SparseOperator& op, const FockDims& dims) {
  return sparse_kron(identity_op(dims.n_cav), op);
}

SparseOperator build_hamiltonian(double g0, const FockDims& dims, double omega_ratio) {
  dims.validate();
  const SparseOperator b = annihilation(dims.n_mech);
  const SparseOperator bp = SparseOperator(b.adjoint()) + b;
  const SparseOperator na = number_op(dims.n_cav);
  SparseOperator H = on_mechanics(number_op(dims.n_mech), dims) - g0 * sparse_kron(na, bp);
  if (omega_ratio != 0.0) H += omega_ratio * on_cavity(na, dims);
  return H;
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const SparseOperator& H, double kappa) {
  const Eigen::Index n = rho.data.rows();
  if (H.rows() != n || H.cols() != n) throw DomainError("Hamiltonian shape mismatch");
  Matrix d = -I * (H * rho.data - rho.data * H);
  if (kappa != 0.0) {
    const SparseOperator a = on_cavity(annihilation(rho.dims.n_cav), rho.dims);
    const SparseOperator na = on_cavity(number_op(rho.dims.n_cav), rho.dims);
    const Matrix ar = a * rho.data;
    d += kappa * (ar * SparseOperator(a.adjoint()) - 0.5 * (na * rho.data + rho.data * na));
  }
  return {rho.dims, std::move(d)};
}

Matrix build_superoperator(const SparseOperator& H, double kappa, const FockDims& dims,
                           const MemoryBudget& budget) {
  dims.validate();
  const std::size_t n = dims.size();
  budget.require(n * n * n * n * sizeof(cplx), "dense superoperator");
  const Matrix h = Matrix(H);
  const Matrix id = Matrix::Identity(Eigen::Index(n), Eigen::Index(n));
  Matrix L = -I * (kron(h, id) - kron(id, h.transpose()));
  if (kappa != 0.0) {
    const Matrix a = Matrix(on_cavity(annihilation(dims.n_cav), dims));
    const Matrix na = a.adjoint() * a;
    L += kappa * (kron(a, a.adjoint().transpose()) -
                  0.5 * (kron(na, id) + kron(id, na.transpose())));
  }
  return L;
}

Matrix unitary_factored(double g0, double tau, const FockDims& dims, int mech_pad) {
  dims.validate();
  const int mp = mech_pad > 0 ? std::max(mech_pad, dims.n_mech) : auto_pad(g0, dims);
  const auto blocks = factored_blocks(g0, tau, dims.n_cav, mp);
  const int M = dims.n_mech;
  Matrix U = Matrix::Zero(Eigen::Index(dims.size()), Eigen::Index(dims.size()));
  for (int n = 0; n < dims.n_cav; ++n) U.block(n * M, n * M, M, M) = blocks[n].topLeftCorner(M, M);
  return U;
}

double heisenberg_a_check(double g0, double tau, const FockDims& dims, int mech_pad) {
  dims.validate();
  const int mp = mech_pad > 0 ? std::max(mech_pad, dims.n_mech) : auto_pad(g0, dims);
  const auto U = factored_blocks(g0, tau, dims.n_cav, mp);
  const FCoeffs f = f_coeffs_constant(g0, tau);
  const Matrix b = Matrix(annihilation(mp));
  const Matrix rhs_mech = std::exp(-I * f.f_a) * HermitianExp(b + b.adjoint())(f.f_plus) *
                          HermitianExp(I * (b.adjoint() - b))(f.f_minus);
  const int keep = dims.n_mech - 2;
  double dev = 0.0;
  // U^dag a U only couples photon n to n + 1.
  for (int n = 0; n + 1 < dims.n_cav - 2; ++n) {
    const double s = std::sqrt(n + 1.0);
    const Matrix lhs = s * U[n].adjoint() * U[n + 1];
    const Matrix rhs = s * std::exp(-2.0 * I * phase_A(f) * double(n)) * rhs_mech;
    dev = std::max(dev, (lhs - rhs).topLeftCorner(keep, keep).cwiseAbs().maxCoeff());
  }
  return dev;
}

cplx expectation(const Matrix& op, const DensityMatrix& rho) {
  if (op.rows() != rho.data.rows() || op.cols() != rho.data.cols()) {
    throw DomainError("operator shape mismatch");
  }
  return op.cwiseProduct(rho.data.transpose()).sum();
}

cplx expectation(const SparseOperator& op, const DensityMatrix& rho) {
  if (op.rows() != rho.data.rows() || op.cols() != rho.data.cols()) {
    throw DomainError("operator shape mismatch");
  }
  cplx s = 0.0;
  for (int k = 0; k < op.outerSize(); ++k)
    for (SparseOperator::InnerIterator it(op, k); it; ++it)
      s += it.value() * rho.data(it.col(), it.row());
  return s;
}

Matrix partial_trace_mech(const DensityMatrix& rho) {
  const int C = rho.dims.n_cav, M = rho.dims.n_mech;
  Matrix out(C, C);
  for (int n = 0; n < C; ++n)
    for (int m = 0; m < C; ++m) out(n, m) = rho.data.block(n * M, m * M, M, M).trace();
  return out;
}

double state_fidelity(const Vector& psi, const Matrix& rho) {
  if (psi.size() != rho.rows() || rho.rows() != rho.cols()) {
    throw DomainError("state and density sizes differ");
  }
  const cplx v = psi.dot(rho * psi);
  if (std::abs(v.imag()) > 1e-10) throw DomainError("fidelity has imaginary residue");
  return std::clamp(v.real(), 0.0, 1.0);
}

FockDims suggest_dims(cplx alpha, cplx beta, double nbar, double g0, double leak_tol) {
  FockDims d;
  d.n_cav = std::max(2, coherent_cutoff(alpha, leak_tol));
  const double mean = std::norm(alpha);
  const int extra = nbar > 0.0 ? thermal_cutoff(nbar, 0.5 * leak_tol) - 2 : 0;
  const double target = nbar > 0.0 ? 0.5 * leak_tol : leak_tol;
  auto leak = [&](int M) {
    double s = 0.0;
    for (int n = 0; n < d.n_cav; ++n) {
      const double r = std::abs(beta) + 2.0 * std::abs(g0) * n;
      const double pn =
          mean == 0.0 ? (n == 0 ? 1.0 : 0.0)
                      : std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
      if (pn > 0.0) s += pn * poisson_tail(r * r, M - 3 - extra);
    }
    return s;
  };
  int M = 2 + extra;
  while (leak(M) >= target) ++M;
  d.n_mech = std::max(2, M);
  return d;
}

std::vector<int> suggest_mech_cutoffs(cplx alpha, cplx beta, double nbar, double g0, int n_cav,
                                      double kappa, double tau, double leak_tol, TailNorm norm) {
  if (n_cav < 2) throw DomainError("cavity cutoff must be at least 2");
  if (!(kappa >= 0.0) || !(tau >= 0.0)) throw DomainError("kappa and tau must be non-negative");
  const double mean = std::norm(alpha);
  const int extra = nbar > 0.0 ? thermal_cutoff(nbar, 0.5 * leak_tol) - 2 : 0;
  const double share = (nbar > 0.0 ? 0.5 * leak_tol : leak_tol) / n_cav;
  std::vector<double> p(n_cav), r(n_cav);
  for (int n = 0; n < n_cav; ++n) {
    p[n] = mean == 0.0 ? (n == 0 ? 1.0 : 0.0)
                       : std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    // A trajectory starting with n photons keeps |<b>| <= |beta| + 2 g0 n
    // whatever its later jumps.
    r[n] = std::abs(beta) + 2.0 * std::abs(g0) * n;
  }
  // Weight of trajectories from n' reaching n: at least n' - n jumps at a
  // rate no larger than kappa n'.
  auto reach = [&](int from, int to) {
    const int d = from - to;
    if (d == 0) return 1.0;
    const double x = kappa * tau * from;
    if (x == 0.0) return 0.0;
    return std::min(1.0, std::exp(d * std::log(x) - std::lgamma(d + 1.0)));
  };
  std::vector<int> cut(n_cav);
  for (int n = 0; n < n_cav; ++n) {
    auto leak = [&](int M) {
      double s = 0.0;
      for (int k = n; k < n_cav; ++k) {
        const double w = p[k] * reach(k, n);
        if (w <= 0.0) continue;
        const double t = poisson_tail(r[k] * r[k], M - 3 - extra);
        s += w * (norm == TailNorm::amplitude ? std::sqrt(t) : t);
      }
      return s;
    };
    int M = n > 0 ? cut[n - 1] : 2 + extra;
    while (leak(M) >= share) ++M;
    cut[n] = M;
  }
  return cut;
}

void write_density(std::ostream& os, const DensityMatrix& rho, const std::string& params_json) {
  nlohmann::json h;
  h["format"] = "optoloss-density";
  h["version"] = 1;
  h["n_cav"] = rho.dims.n_cav;
  h["n_mech"] = rho.dims.n_mech;
  h["order"] = "row-major";
  h["params"] = nlohmann::json::parse(params_json);
  os << h.dump() << '\n';
  for (Eigen::Index i = 0; i < rho.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.data.cols(); ++j) {
      if (j) os << ',';
      os << csv::num(rho.data(i, j).real()) << ',' << csv::num(rho.data(i, j).imag());
    }
    os << '\n';
  }
}

DensityMatrix read_density(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("density dump is empty");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("density dump header: ") + e.what());
  }
  if (h.value("format", "") != "optoloss-density") throw DomainError("not a density dump");
  FockDims d{h.at("n_cav").get<int>(), h.at("n_mech").get<int>()};
  d.validate();
  const Eigen::Index n = Eigen::Index(d.size());
  DensityMatrix rho{d, Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw DomainError("density dump truncated");
    const auto cells = csv::split(line);
    if (Eigen::Index(cells.size()) != 2 * n) throw DomainError("density dump row has wrong width");
    for (Eigen::Index j = 0; j < n; ++j) {
      rho.data(i, j) = cplx(std::stod(cells[2 * j]), std::stod(cells[2 * j + 1]));
    }
  }
  return rho;
}

}  // namespace optoloss
