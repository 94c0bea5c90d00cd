#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "optoloss/coupling.hpp"

namespace optoloss {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseOperator = Eigen::SparseMatrix<cplx>;

struct FockDims {
  int n_cav = 2;
  int n_mech = 2;

  std::size_t size() const { return std::size_t(n_cav) * std::size_t(n_mech); }
  std::size_t index(int nc, int nm) const { return std::size_t(nc) * n_mech + nm; }
  void validate() const;
  bool operator==(const FockDims&) const = default;
};

// Upper limit on bytes for a single oracle allocation.
struct MemoryBudget {
  std::size_t bytes = std::size_t(3) << 30;
  void require(std::size_t need, const std::string& what) const;
};

// Two-mode density matrix, cavity-major ordering.
struct DensityMatrix {
  FockDims dims;
  Matrix data;

  static DensityMatrix pure(const FockDims& dims, const Vector& psi);
  static DensityMatrix product(const Matrix& rho_cav, const Matrix& rho_mech);

  cplx trace() const { return data.trace(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
  double purity() const;
  // Hermitian within herm_tol, unit trace within trace_tol, and optionally
  // min eigenvalue >= -pos_tol.
  void validate(double herm_tol = 1e-12, double trace_tol = 1e-10, bool positivity = false,
                double pos_tol = 1e-8) const;
};

// Row-stacked: vec[i * N + j] = rho(i, j).
struct VectorizedState {
  FockDims dims;
  Vector vec;
};
VectorizedState vectorize(const DensityMatrix& rho);
DensityMatrix devectorize(const VectorizedState& v);

// Smallest n with Poisson(|amp|^2) weight in the top two levels and beyond
// below leak_tol.
int coherent_cutoff(cplx amp, double leak_tol = 1e-8);
int thermal_cutoff(double nbar, double leak_tol = 1e-8);
Vector coherent_state(cplx amp, int n, double leak_tol = 1e-8);
// Single-mode thermal density matrix.
Matrix thermal_state(double nbar, int n, double leak_tol = 1e-8);

SparseOperator annihilation(int n);
SparseOperator number_op(int n);
SparseOperator identity_op(int n);
// op (x) 1 and 1 (x) op on the two-mode space.
SparseOperator on_cavity(const SparseOperator& op, const FockDims& dims);
SparseOperator on_mechanics(const SparseOperator& op, const FockDims& dims);

// N_b - g0 N_a (b + b^dag) [+ omega_ratio N_a], hbar = 1, cavity-rotating frame.
SparseOperator build_hamiltonian(double g0, const FockDims& dims, double omega_ratio = 0.0);
// -i[H, rho] + kappa (a rho a^dag - {N_a, rho}/2), sparse products only.
DensityMatrix lindblad_rhs(const DensityMatrix& rho, const SparseOperator& H, double kappa);
// Dense Liouvillian acting on row-stacked vectors.
Matrix build_superoperator(const SparseOperator& H, double kappa, const FockDims& dims,
                           const MemoryBudget& budget = {});

// Product of the four factored exponentials. Displacement factors are
// formed on a padded mechanical space (mech_pad levels, 0 = automatic) so the
// returned dims-sized matrix holds exact elements, not truncation artefacts.
Matrix unitary_factored(double g0, double tau, const FockDims& dims, int mech_pad = 0);
// Max deviation between U^dag a U and its factored closed form on the
// interior block (outer two levels of each mode excluded).
double heisenberg_a_check(double g0, double tau, const FockDims& dims, int mech_pad = 0);

cplx expectation(const Matrix& op, const DensityMatrix& rho);
cplx expectation(const SparseOperator& op, const DensityMatrix& rho);
Matrix partial_trace_mech(const DensityMatrix& rho);
// <psi|rho|psi> for a single-mode rho.
double state_fidelity(const Vector& psi, const Matrix& rho);

// Cutoffs for coherent(alpha) (x) coherent(beta) or thermal(nbar) such that
// the mechanics, displaced by up to 2 g0 n for n photons, leaks less than
// leak_tol weighted over the photon distribution.
FockDims suggest_dims(cplx alpha, cplx beta, double nbar, double g0, double leak_tol = 1e-8);
// How a truncated tail population t enters the leak budget: t itself bounds
// errors in quantities quadratic in the state (populations, fidelities);
// sqrt(t) bounds errors in quantities linear in a block, such as <a>.
enum class TailNorm { population, amplitude };

// Per-photon-number mechanical cutoffs for evolution up to tau under loss
// kappa, nondecreasing in n, each photon number getting an equal share of
// leak_tol. Block n also holds mechanics displaced while more photons were
// present, so decays from above are counted.
std::vector<int> suggest_mech_cutoffs(cplx alpha, cplx beta, double nbar, double g0, int n_cav,
                                      double kappa, double tau, double leak_tol = 1e-8,
                                      TailNorm norm = TailNorm::population);

struct EvolveConfig {
  struct FixedRK4 {
    double dt = 0.0;  // <= 0 picks the spectral-radius heuristic
  };
  struct AdaptiveRK {
    double rtol = 1e-10;
    double atol = 1e-12;
  };
  // Chebyshev expansion of the exact block propagator; constant coupling only.
  struct Chebyshev {};

  std::variant<FixedRK4, AdaptiveRK, Chebyshev> method = Chebyshev{};
  double leak_tol = 1e-8;
  double trace_tol = 1e-8;
  int rehermitize_every = 100;
  // Coherence orders n - n' to propagate; they decouple exactly. Empty = all.
  std::vector<int> orders;
  // Mechanical cutoff per photon number, nondecreasing, at most n_mech.
  // Empty = n_mech throughout.
  std::vector<int> mech_cutoffs;
  MemoryBudget budget;

  void validate() const;
};

struct EvolveStats {
  long steps = 0;
  double trace_drift = 0.0;  // NaN when order 0 is not propagated
  double mech_leak = 0.0;    // max top-two-level population seen
  double cavity_leak = 0.0;
};

namespace detail {
class BlockState;
}

// Read-only view of the oracle state at a sample time.
class OracleSnapshot {
 public:
  explicit OracleSnapshot(const detail::BlockState& s) : s_(&s) {}
  const FockDims& dims() const;
  bool has_order(int k) const;
  cplx expect_a() const;          // needs order 1
  double photon_number() const;   // needs order 0
  double trace() const;           // needs order 0
  Matrix cavity_state() const;    // needs all orders
  DensityMatrix density() const;  // needs all orders
  double mech_edge_population() const;

 private:
  const detail::BlockState* s_;
};

struct ProductState {
  Matrix cav;
  Matrix mech;
};

using SampleObserver = std::function<void(double tau, const OracleSnapshot&)>;

DensityMatrix evolve(const DensityMatrix& rho0, const CouplingProfile& g, double kappa,
                     double tau_end, const EvolveConfig& cfg = {}, EvolveStats* stats = nullptr);
// Calls observer at each tau (strictly increasing, >= 0), including tau = 0.
EvolveStats evolve_sampled(const DensityMatrix& rho0, const CouplingProfile& g, double kappa,
                           const std::vector<double>& taus, const EvolveConfig& cfg,
                           const SampleObserver& observer);
EvolveStats evolve_sampled(const ProductState& rho0, const CouplingProfile& g, double kappa,
                           const std::vector<double>& taus, const EvolveConfig& cfg,
                           const SampleObserver& observer);

// Text dump: one JSON header line, then one row per line as re,im pairs.
void write_density(std::ostream& os, const DensityMatrix& rho,
                   const std::string& params_json = "{}");
DensityMatrix read_density(std::istream& is);

}  // namespace optoloss
