#pragma once

// Vectorized Liouvillian assembly and steady-state / time-domain solution.
// The element equations are
//   d rho_lm/dt = -[(G_l+G_m)/2 + i(d_l-d_m)] rho_lm
//                 + (i/2) sum_u (O_lu rho_um - rho_lu O_um)
//                 + delta_lm Lambda_l(rho)
// with Lambda linear in the populations, so the whole right-hand side is one
// linear operator M acting on the stacked vector of matrix elements.  The
// solver is dimension-generic: the full model has N = 32 levels, test
// oracles use small N.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>

namespace cptsim {

using complexd = std::complex<double>;

// Everything the equations of motion need, for N levels.
struct LevelSystem {
  Eigen::VectorXd decay;     // N decay rates (angular)
  Eigen::VectorXd detuning;  // N detunings (angular)
  Eigen::MatrixXcd coupling; // N x N Hermitian Rabi matrix (angular)
  Eigen::MatrixXd source;    // N x N influx coefficients (see relaxation)

  int levels() const { return static_cast<int>(decay.size()); }
};

struct Liouvillian {
  Eigen::SparseMatrix<complexd> m; // N^2 x N^2, rates divided by `scale`
  double scale = 1.0;              // nondimensionalization rate (max decay)
  int n = 0;                       // number of levels
};

// Builds M with all rates divided by the largest decay rate, which keeps the
// entries O(1) despite gamma_p/Gamma spanning ~7 decades.
Liouvillian assemble(const LevelSystem& system);

// Applies the element equations directly (no vectorization) — the
// independent oracle for `assemble`.
Eigen::MatrixXcd apply_equations_of_motion(const LevelSystem& system,
                                           const Eigen::MatrixXcd& rho);

struct SolverOptions {
  double residual_tol = 1e-9;   // on ||M rho|| relative to ||M||
  double hermiticity_tol = 1e-12; // relative, asserted (never projected)
  bool force_dense = false;     // dense LU instead of sparse (testing)
};

// Steady state of M rho = 0 with trace(rho) = 1: the d rho_11/dt row is
// replaced by the trace constraint and the square system solved directly.
// Throws std::runtime_error with diagnostics if the factorization fails or
// the residual / Hermiticity / trace checks do not pass.
Eigen::MatrixXcd steady_state(const Liouvillian& liouvillian,
                              const SolverOptions& options = {});

// Reusable solver: keeps the sparse symbolic analysis across repeated solves
// with an identical sparsity pattern (scan points differ only in detunings).
class SteadyStateSolver {
 public:
  SteadyStateSolver();
  ~SteadyStateSolver();
  SteadyStateSolver(SteadyStateSolver&&) noexcept;
  SteadyStateSolver& operator=(SteadyStateSolver&&) noexcept;

  Eigen::MatrixXcd solve(const Liouvillian& liouvillian,
                         const SolverOptions& options = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Propagates d rho/dt = M rho for `duration` (seconds) starting from rho0,
// using L-stable implicit Euler steps.  The step starts at dt0 and grows
// geometrically (factor 1.2) — the dynamics stiffen only toward slower
// scales, and implicit Euler damps the fast transients unconditionally.
// Throws std::runtime_error if the state diverges (instability detected).
Eigen::MatrixXcd time_evolve(const Liouvillian& liouvillian,
                             const Eigen::MatrixXcd& rho0, double duration,
                             double dt0);

// Convenience checks used by tests and the validation command.
double hermiticity_defect(const Eigen::MatrixXcd& rho);  // max |rho-rho^dag| / max |rho|
double trace_defect(const Eigen::MatrixXcd& rho);        // |tr(rho) - 1|

} // namespace cptsim
