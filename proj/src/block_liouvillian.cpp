#include <algorithm>
#include <cmath>

#include "block_kernel.hpp"
#include "block_state.hpp"
#include "optoloss/error.hpp"

namespace optoloss::detail {

namespace {
// Mechanical trace of a possibly rectangular block.
cplx block_trace(const Matrix& b) { return b.diagonal().sum(); }
}  // namespace

BlockLayout::BlockLayout(const FockDims& dims, std::vector<int> orders, std::vector<int> cutoffs)
    : dims_(dims) {
  dims.validate();
  const int C = dims.n_cav;
  if (cutoffs.empty()) cutoffs.assign(C, dims.n_mech);
  if (int(cutoffs.size()) != C) throw DomainError("need one mechanical cutoff per photon number");
  for (int n = 0; n < C; ++n) {
    if (cutoffs[n] < 2 || cutoffs[n] > dims.n_mech) {
      throw DomainError("mechanical cutoff outside [2, n_mech]");
    }
    if (n > 0 && cutoffs[n] < cutoffs[n - 1]) {
      throw DomainError("mechanical cutoffs must be nondecreasing in photon number");
    }
  }
  cutoffs_ = std::move(cutoffs);
  if (orders.empty()) {
    for (int k = 0; k < C; ++k) orders.push_back(k);
  }
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  for (int k : orders) {
    if (k < 0 || k >= C) throw DomainError("coherence order out of range");
  }
  orders_ = orders;
  complete_ = int(orders_.size()) == C;
  lookup_.assign(std::size_t(C) * C, -1);
  for (int k : orders_)
    for (int m = 0; m + k < C; ++m) {
      lookup_[std::size_t(m + k) * C + m] = int(pairs_.size());
      pairs_.push_back({m + k, m, -1});
    }
  for (auto& p : pairs_) p.above = find(p.n + 1, p.m + 1);
}

bool BlockLayout::has_order(int k) const {
  return std::binary_search(orders_.begin(), orders_.end(), k);
}

int BlockLayout::find(int n, int m) const {
  const int C = dims_.n_cav;
  if (n < 0 || m < 0 || n >= C || m >= C) return -1;
  return lookup_[std::size_t(n) * C + m];
}

std::size_t BlockLayout::bytes_per_state() const {
  std::size_t n = 0;
  for (const auto& p : pairs_) n += std::size_t(cutoffs_[p.n]) * cutoffs_[p.m];
  return n * sizeof(cplx);
}

BlockState::BlockState(const BlockLayout& layout) : layout_(&layout) {
  blocks_.reserve(layout.pairs().size());
  for (const auto& p : layout.pairs()) {
    blocks_.push_back(Matrix::Zero(layout.cutoff(p.n), layout.cutoff(p.m)));
  }
}

void BlockState::set_zero() {
  for (auto& b : blocks_) b.setZero();
}

void BlockState::load(const DensityMatrix& rho) {
  if (!(rho.dims == layout_->dims())) throw DomainError("state dims do not match layout");
  const int M = rho.dims.n_mech;
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& q = pairs[p];
    blocks_[p] = rho.data.block(q.n * M, q.m * M, layout_->cutoff(q.n), layout_->cutoff(q.m));
  }
}

void BlockState::load(const ProductState& rho) {
  const FockDims& d = layout_->dims();
  if (rho.cav.rows() != d.n_cav || rho.mech.rows() != d.n_mech) {
    throw DomainError("product state dims do not match layout");
  }
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& q = pairs[p];
    blocks_[p] = rho.cav(q.n, q.m) *
                 rho.mech.topLeftCorner(layout_->cutoff(q.n), layout_->cutoff(q.m));
  }
}

DensityMatrix BlockState::density() const {
  if (!layout_->complete()) throw DomainError("full density needs every coherence order");
  const FockDims& d = layout_->dims();
  const int M = d.n_mech;
  DensityMatrix rho{d, Matrix::Zero(Eigen::Index(d.size()), Eigen::Index(d.size()))};
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& q = pairs[p];
    const Matrix& b = blocks_[p];
    rho.data.block(q.n * M, q.m * M, b.rows(), b.cols()) = b;
    if (q.n != q.m) rho.data.block(q.m * M, q.n * M, b.cols(), b.rows()) = b.adjoint();
  }
  return rho;
}

Matrix BlockState::cavity_state() const {
  if (!layout_->complete()) throw DomainError("cavity state needs every coherence order");
  const int C = layout_->dims().n_cav;
  Matrix out(C, C);
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const cplx t = block_trace(blocks_[p]);
    out(pairs[p].n, pairs[p].m) = t;
    out(pairs[p].m, pairs[p].n) = std::conj(t);
  }
  for (int n = 0; n < C; ++n) out(n, n) = out(n, n).real();
  return out;
}

cplx BlockState::expect_a() const {
  if (!layout_->has_order(1)) throw DomainError("<a> needs coherence order 1");
  // Tr[a rho] = sum_n sqrt(n + 1) Tr rho_{n+1, n}.
  cplx s = 0.0;
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].n == pairs[p].m + 1) s += std::sqrt(double(pairs[p].n)) * block_trace(blocks_[p]);
  }
  return s;
}

double BlockState::photon_number() const {
  if (!layout_->has_order(0)) throw DomainError("photon number needs coherence order 0");
  double s = 0.0;
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].n == pairs[p].m) s += pairs[p].n * blocks_[p].trace().real();
  }
  return s;
}

double BlockState::trace() const {
  if (!layout_->has_order(0)) throw DomainError("trace needs coherence order 0");
  double s = 0.0;
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].n == pairs[p].m) s += blocks_[p].trace().real();
  }
  return s;
}

double BlockState::mech_edge_population() const {
  if (!layout_->has_order(0)) return 0.0;
  double s = 0.0;
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].n != pairs[p].m) continue;
    const int M = layout_->cutoff(pairs[p].n);
    s += std::abs(blocks_[p](M - 1, M - 1).real()) + std::abs(blocks_[p](M - 2, M - 2).real());
  }
  return s;
}

double BlockState::cavity_edge_population() const {
  if (!layout_->has_order(0)) return 0.0;
  const int C = layout_->dims().n_cav;
  double s = 0.0;
  for (int n = C - 2; n < C; ++n) s += std::abs(blocks_[layout_->find(n, n)].trace().real());
  return s;
}

void BlockState::rehermitize() {
  const auto& pairs = layout_->pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].n != pairs[p].m) continue;
    Matrix& b = blocks_[p];
    b = (0.5 * (b + b.adjoint())).eval();
  }
}

SpectralBox spectral_box(const BlockLayout& layout, double g, double kappa) {
  const FockDims& d = layout.dims();
  // Extreme eigenvalues of the tridiagonal H_n = N_b - g n (b + b^dag).
  std::vector<double> emin(d.n_cav), emax(d.n_cav);
  for (int n = 0; n < d.n_cav; ++n) {
    const int M = layout.cutoff(n);
    Eigen::VectorXd diag(M), sub(M - 1);
    for (int i = 0; i < M; ++i) diag(i) = i;
    for (int i = 0; i + 1 < M; ++i) sub(i) = -g * n * std::sqrt(i + 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    emin[n] = es.eigenvalues()(0);
    emax[n] = es.eigenvalues()(M - 1);
  }
  // Gershgorin on the Hermitian part bounds the real axis; the loss feed
  // between blocks is the only non-normal piece.
  double lo = INFINITY, hi = -INFINITY, w = 0.0;
  const auto& pairs = layout.pairs();
  std::vector<double> feed_in(pairs.size(), 0.0);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].above >= 0) {
      feed_in[pairs[p].above] = kappa * std::sqrt((pairs[p].n + 1.0) * (pairs[p].m + 1.0));
    }
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& q = pairs[p];
    const double gamma = 0.5 * kappa * (q.n + q.m);
    const double out = q.above >= 0 ? kappa * std::sqrt((q.n + 1.0) * (q.m + 1.0)) : 0.0;
    const double r = 0.5 * (out + feed_in[p]);
    lo = std::min(lo, -gamma - r);
    hi = std::max(hi, -gamma + r);
    w = std::max({w, std::abs(emax[q.n] - emin[q.m]), std::abs(emin[q.n] - emax[q.m])});
  }
  return {0.5 * (lo + hi), 0.5 * (hi - lo), w};
}

void apply_affine(const BlockLayout& layout, double g, double kappa, double shift, cplx s,
                  const std::vector<Matrix>& x, double t, const std::vector<Matrix>* z,
                  std::vector<Matrix>& y, cplx a, std::vector<Matrix>* acc) {
  const int M = layout.dims().n_mech;
  // rt[k] = sqrt(k / 2): per-double square roots of the level index.
  std::vector<double> rt(2 * M + 2), lev(2 * M), v(2 * M);
  for (int k = 0; k < 2 * M + 2; ++k) rt[k] = std::sqrt(double(k / 2));
  for (int k = 0; k < 2 * M; ++k) lev[k] = k / 2;
  const auto& pairs = layout.pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& q = pairs[p];
    BlockArgs b{};
    b.x = reinterpret_cast<const double*>(x[p].data());
    b.xa = q.above >= 0 ? reinterpret_cast<const double*>(x[q.above].data()) : nullptr;
    b.z = z ? reinterpret_cast<const double*>((*z)[p].data()) : nullptr;
    b.y = reinterpret_cast<double*>(y[p].data());
    b.acc = acc ? reinterpret_cast<double*>((*acc)[p].data()) : nullptr;
    b.rows = layout.cutoff(q.n);
    b.cols = layout.cutoff(q.m);
    b.lda_above = q.above >= 0 ? 2 * layout.cutoff(q.n + 1) : 0;
    b.gn = g * q.n;
    b.gm = g * q.m;
    b.diag = 0.5 * kappa * (q.n + q.m) + shift;
    b.sab = q.above >= 0 ? kappa * std::sqrt((q.n + 1.0) * (q.m + 1.0)) : 0.0;
    b.sr = s.real();
    b.si = s.imag();
    b.t = t;
    b.ar = a.real();
    b.ai = a.imag();
    block_apply(b, rt.data(), lev.data(), v.data());
  }
}

}  // namespace optoloss::detail
