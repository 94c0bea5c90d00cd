#pragma once

// Block representation of a two-mode density matrix. The photon-loss
// Lindbladian keeps each cavity block rho_{n n'} (a mechanical matrix) coupled
// only to itself and to rho_{n+1, n'+1}, so coherence orders k = n - n'
// evolve independently. Only n >= n' is stored; the rest follows by
// Hermiticity. Photon number n may keep its own mechanical cutoff M_n
// (nondecreasing in n), making rho_{n n'} an M_n x M_n' block; the loss feed
// from the larger block above is cropped to its top-left corner.

#include <vector>

#include "optoloss/fock.hpp"

namespace optoloss::detail {

struct BlockPair {
  int n;
  int m;
  int above;  // index of (n + 1, m + 1), or -1
};

class BlockLayout {
 public:
  // Empty cutoffs = dims.n_mech for every photon number.
  BlockLayout(const FockDims& dims, std::vector<int> orders, std::vector<int> cutoffs = {});

  const FockDims& dims() const { return dims_; }
  int cutoff(int n) const { return cutoffs_[n]; }
  const std::vector<int>& cutoffs() const { return cutoffs_; }
  const std::vector<BlockPair>& pairs() const { return pairs_; }
  bool has_order(int k) const;
  bool complete() const { return complete_; }
  int find(int n, int m) const;  // -1 if not stored
  std::size_t bytes_per_state() const;

 private:
  FockDims dims_;
  std::vector<int> orders_;
  std::vector<int> cutoffs_;
  std::vector<BlockPair> pairs_;
  std::vector<int> lookup_;
  bool complete_ = false;
};

class BlockState {
 public:
  explicit BlockState(const BlockLayout& layout);

  const BlockLayout& layout() const { return *layout_; }
  std::vector<Matrix>& blocks() { return blocks_; }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  void set_zero();
  void load(const DensityMatrix& rho);
  void load(const ProductState& rho);
  DensityMatrix density() const;
  Matrix cavity_state() const;
  cplx expect_a() const;
  double photon_number() const;
  double trace() const;
  double mech_edge_population() const;
  double cavity_edge_population() const;
  void rehermitize();

 private:
  const BlockLayout* layout_;
  std::vector<Matrix> blocks_;
};

// Spectral enclosure of the block Liouvillian for one coupling value:
// eigenvalues lie in {c + i y + x : |y| <= half_width, |x| <= real_radius}.
struct SpectralBox {
  double center = 0.0;
  double real_radius = 0.0;
  double half_width = 0.0;
};
SpectralBox spectral_box(const BlockLayout& layout, double g, double kappa);

// y = s (L x - shift x) + t z, then acc += a y when acc is given.
// y may alias z but not x.
void apply_affine(const BlockLayout& layout, double g, double kappa, double shift, cplx s,
                  const std::vector<Matrix>& x, double t, const std::vector<Matrix>* z,
                  std::vector<Matrix>& y, cplx a = 0.0, std::vector<Matrix>* acc = nullptr);

}  // namespace optoloss::detail
