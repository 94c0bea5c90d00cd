#include "block_kernel.hpp"

#include <cstddef>

namespace optoloss::detail {

namespace {

// One rows x cols mechanical block, columns stored interleaved (re, im).
template <bool HasAbove, bool HasZ, bool HasAcc>
void block_kernel(const BlockArgs& b, const double* rt, const double* lev, double* __restrict v) {
  const int L = 2 * b.rows;
  const int M = b.cols;
  for (int j = 0; j < M; ++j) {
    const std::size_t off = std::size_t(j) * L;
    const double* __restrict c = b.x + off;
    const double* __restrict cl = j > 0 ? c - L : c;
    const double* __restrict cr = j + 1 < M ? c + L : c;
    const double wl = j > 0 ? b.gm * rt[2 * j] : 0.0;
    const double wr = j + 1 < M ? b.gm * rt[2 * j + 2] : 0.0;
    const double jj = j;
    // v = (H_n X - X H_m) column j; every coefficient is real.
    v[0] = -jj * c[0] - b.gn * rt[2] * c[2] + wl * cl[0] + wr * cr[0];
    v[1] = -jj * c[1] - b.gn * rt[2] * c[3] + wl * cl[1] + wr * cr[1];
    for (int k = 2; k < L - 2; ++k) {
      v[k] = (lev[k] - jj) * c[k] - b.gn * (rt[k] * c[k - 2] + rt[k + 2] * c[k + 2]) +
             wl * cl[k] + wr * cr[k];
    }
    for (int k = L - 2; k < L; ++k) {
      v[k] = (lev[k] - jj) * c[k] - b.gn * rt[k] * c[k - 2] + wl * cl[k] + wr * cr[k];
    }
    const double* __restrict xa = HasAbove ? b.xa + std::size_t(j) * b.lda_above : nullptr;
    const double* zc = HasZ ? b.z + off : nullptr;
    double* yc = b.y + off;
    double* __restrict accc = HasAcc ? b.acc + off : nullptr;
    for (int k = 0; k < L; k += 2) {
      // L x = -i v - diag x + sab x_above
      double lr = v[k + 1] - b.diag * c[k];
      double li = -v[k] - b.diag * c[k + 1];
      if constexpr (HasAbove) {
        lr += b.sab * xa[k];
        li += b.sab * xa[k + 1];
      }
      double outr = b.sr * lr - b.si * li;
      double outi = b.sr * li + b.si * lr;
      if constexpr (HasZ) {
        outr += b.t * zc[k];
        outi += b.t * zc[k + 1];
      }
      yc[k] = outr;
      yc[k + 1] = outi;
      if constexpr (HasAcc) {
        accc[k] += b.ar * outr - b.ai * outi;
        accc[k + 1] += b.ar * outi + b.ai * outr;
      }
    }
  }
}

template <bool HasAbove, bool HasZ>
void dispatch_acc(const BlockArgs& b, const double* rt, const double* lev, double* v) {
  if (b.acc) {
    block_kernel<HasAbove, HasZ, true>(b, rt, lev, v);
  } else {
    block_kernel<HasAbove, HasZ, false>(b, rt, lev, v);
  }
}

template <bool HasAbove>
void dispatch_z(const BlockArgs& b, const double* rt, const double* lev, double* v) {
  if (b.z) {
    dispatch_acc<HasAbove, true>(b, rt, lev, v);
  } else {
    dispatch_acc<HasAbove, false>(b, rt, lev, v);
  }
}

}  // namespace

void block_apply(const BlockArgs& b, const double* rt, const double* lev, double* v) {
  if (b.xa) {
    dispatch_z<true>(b, rt, lev, v);
  } else {
    dispatch_z<false>(b, rt, lev, v);
  }
}

}  // namespace optoloss::detail
