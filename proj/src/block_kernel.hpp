#pragma once

// Inner loop of the block Liouvillian on raw interleaved doubles. Kept free
// of Eigen so it can be built with machine-specific flags without changing
// the allocation ABI seen by the rest of the library.

namespace optoloss::detail {

struct BlockArgs {
  const double* x;
  const double* xa;  // block (n + 1, m + 1), or null
  const double* z;
  double* y;
  double* acc;
  int rows, cols, lda_above;  // lda_above in doubles
  double gn, gm, diag, sab, sr, si, t, ar, ai;
};

// rt[k] = sqrt(k / 2), lev[k] = k / 2 for k < 2 rows + 2; v holds 2 rows.
void block_apply(const BlockArgs& b, const double* rt, const double* lev, double* v);

}  // namespace optoloss::detail
