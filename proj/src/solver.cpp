#include "cptsim/solver.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cptsim {

namespace {

// Stacked-vector index of matrix element (i, j), row-major.
inline int flat(int i, int j, int n) { return i * n + j; }

void check_system(const LevelSystem& system) {
  const int n = system.levels();
  if (n <= 0) throw std::invalid_argument("LevelSystem: empty");
  if (system.detuning.size() != n || system.coupling.rows() != n ||
      system.coupling.cols() != n || system.source.rows() != n ||
      system.source.cols() != n) {
    throw std::invalid_argument("LevelSystem: inconsistent dimensions");
  }
}

// Builds the trace-constrained system A x = b: row of d rho_11/dt replaced
// by sum of populations = 1.
Eigen::SparseMatrix<complexd> constrained_matrix(const Liouvillian& liouvillian) {
  const int n = liouvillian.n;
  const int nn = n * n;
  std::vector<Eigen::Triplet<complexd>> trip;
  trip.reserve(liouvillian.m.nonZeros() + n);
  for (int k = 0; k < liouvillian.m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<complexd>::InnerIterator it(liouvillian.m, k); it;
         ++it) {
      if (it.row() == 0) continue; // the d rho_11/dt row is replaced
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                        it.value());
    }
  }
  for (int m = 0; m < n; ++m) trip.emplace_back(0, flat(m, m, n), complexd(1, 0));
  Eigen::SparseMatrix<complexd> a(nn, nn);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

Eigen::MatrixXcd reshape_row_major(const Eigen::VectorXcd& x, int n) {
  Eigen::MatrixXcd rho(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rho(i, j) = x[flat(i, j, n)];
  return rho;
}

Eigen::VectorXcd flatten_row_major(const Eigen::MatrixXcd& rho) {
  const int n = static_cast<int>(rho.rows());
  Eigen::VectorXcd x(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x[flat(i, j, n)] = rho(i, j);
  return x;
}

void check_solution(const Liouvillian& liouvillian, const Eigen::VectorXcd& x,
                    const SolverOptions& options) {
  const double m_norm = liouvillian.m.norm();
  const double residual = (liouvillian.m * x).norm();
  if (!(residual <= options.residual_tol * m_norm)) {
    std::ostringstream msg;
    msg << "steady_state: residual " << residual << " exceeds "
        << options.residual_tol << " * ||M|| = " << options.residual_tol * m_norm;
    throw std::runtime_error(msg.str());
  }
  const Eigen::MatrixXcd rho = reshape_row_major(x, liouvillian.n);
  const double herm = hermiticity_defect(rho);
  if (!(herm <= options.hermiticity_tol)) {
    std::ostringstream msg;
    msg << "steady_state: Hermiticity defect " << herm << " exceeds "
        << options.hermiticity_tol << " (solution rejected, not projected)";
    throw std::runtime_error(msg.str());
  }
  const double tr = trace_defect(rho);
  if (!(tr <= options.residual_tol)) {
    std::ostringstream msg;
    msg << "steady_state: trace defect " << tr;
    throw std::runtime_error(msg.str());
  }
}

Eigen::VectorXcd solve_dense(const Eigen::SparseMatrix<complexd>& a,
                             const Eigen::VectorXcd& b) {
  const Eigen::MatrixXcd dense(a);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(dense);
  return lu.solve(b);
}

} // namespace

Liouvillian assemble(const LevelSystem& system) {
  check_system(system);
  const int n = system.levels();
  Liouvillian out;
  out.n = n;
  out.scale = system.decay.maxCoeff();
  if (out.scale <= 0) out.scale = 1.0;
  const double s = out.scale;

  std::vector<Eigen::Triplet<complexd>> trip;
  trip.reserve(static_cast<size_t>(n) * n * 4);
  const complexd half_i(0.0, 0.5);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int row = flat(i, j, n);
      // Damping + oscillation of the element itself.
      const complexd diag(-0.5 * (system.decay[i] + system.decay[j]) / s,
                          -(system.detuning[i] - system.detuning[j]) / s);
      trip.emplace_back(row, row, diag);
      // (i/2) sum_u O_iu rho_uj  and  -(i/2) sum_u rho_iu O_uj.
      for (int u = 0; u < n; ++u) {
        const complexd o_iu = system.coupling(i, u);
        if (o_iu != complexd(0, 0)) {
          trip.emplace_back(row, flat(u, j, n), half_i * o_iu / s);
        }
        const complexd o_uj = system.coupling(u, j);
        if (o_uj != complexd(0, 0)) {
          trip.emplace_back(row, flat(i, u, n), -half_i * o_uj / s);
        }
      }
    }
    // Population influx, diagonal rows only.
    for (int m = 0; m < n; ++m) {
      if (system.source(i, m) != 0.0) {
        trip.emplace_back(flat(i, i, n), flat(m, m, n),
                          complexd(system.source(i, m) / s, 0));
      }
    }
  }
  out.m.resize(n * n, n * n);
  out.m.setFromTriplets(trip.begin(), trip.end());
  out.m.makeCompressed();
  return out;
}

Eigen::MatrixXcd apply_equations_of_motion(const LevelSystem& system,
                                           const Eigen::MatrixXcd& rho) {
  check_system(system);
  const int n = system.levels();
  if (rho.rows() != n || rho.cols() != n) {
    throw std::invalid_argument("apply_equations_of_motion: rho dimension mismatch");
  }
  Eigen::MatrixXcd out(n, n);
  const complexd half_i(0.0, 0.5);
  for (int l = 0; l < n; ++l) {
    for (int m = 0; m < n; ++m) {
      complexd v = -(complexd(0.5 * (system.decay[l] + system.decay[m]),
                              system.detuning[l] - system.detuning[m])) *
                   rho(l, m);
      complexd drive(0, 0);
      for (int u = 0; u < n; ++u) {
        drive += system.coupling(l, u) * rho(u, m) -
                 rho(l, u) * system.coupling(u, m);
      }
      v += half_i * drive;
      if (l == m) {
        complexd influx(0, 0);
        for (int k = 0; k < n; ++k) {
          if (system.source(l, k) != 0.0) influx += system.source(l, k) * rho(k, k);
        }
        v += influx;
      }
      out(l, m) = v;
    }
  }
  return out;
}

Eigen::MatrixXcd steady_state(const Liouvillian& liouvillian,
                              const SolverOptions& options) {
  SteadyStateSolver solver;
  return solver.solve(liouvillian, options);
}

struct SteadyStateSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<complexd>> lu;
  bool analyzed = false;
  int n = 0;
  Eigen::Index nonzeros = 0;
};

SteadyStateSolver::SteadyStateSolver() : impl_(new Impl) {}
SteadyStateSolver::~SteadyStateSolver() = default;
SteadyStateSolver::SteadyStateSolver(SteadyStateSolver&&) noexcept = default;
SteadyStateSolver& SteadyStateSolver::operator=(SteadyStateSolver&&) noexcept =
    default;

Eigen::MatrixXcd SteadyStateSolver::solve(const Liouvillian& liouvillian,
                                          const SolverOptions& options) {
  const int n = liouvillian.n;
  if (n <= 0) throw std::invalid_argument("SteadyStateSolver: empty Liouvillian");
  const int nn = n * n;
  const Eigen::SparseMatrix<complexd> a = constrained_matrix(liouvillian);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(nn);
  b[0] = complexd(1, 0);

  Eigen::VectorXcd x;
  // Small systems: dense LU is both faster and free of ordering overhead.
  const bool dense_path = options.force_dense || nn <= 128;
  bool solved = false;
  if (!dense_path) {
    if (!impl_->analyzed || impl_->n != n || impl_->nonzeros != a.nonZeros()) {
      impl_->lu.analyzePattern(a);
      impl_->analyzed = true;
      impl_->n = n;
      impl_->nonzeros = a.nonZeros();
    }
    impl_->lu.factorize(a);
    if (impl_->lu.info() == Eigen::Success) {
      x = impl_->lu.solve(b);
      solved = impl_->lu.info() == Eigen::Success;
    }
    if (!solved) impl_->analyzed = false; // force re-analysis next time
  }
  if (!solved) x = solve_dense(a, b);

  check_solution(liouvillian, x, options);
  return reshape_row_major(x, n);
}

Eigen::MatrixXcd time_evolve(const Liouvillian& liouvillian,
                             const Eigen::MatrixXcd& rho0, double duration,
                             double dt0) {
  const int n = liouvillian.n;
  if (rho0.rows() != n || rho0.cols() != n) {
    throw std::invalid_argument("time_evolve: rho0 dimension mismatch");
  }
  if (!(duration > 0) || !(dt0 > 0)) {
    throw std::invalid_argument("time_evolve: duration and dt0 must be positive");
  }
  // Work in dimensionless time tau = t * scale, where M is already scaled.
  const double tau_total = duration * liouvillian.scale;
  double dtau = dt0 * liouvillian.scale;
  Eigen::VectorXcd x = flatten_row_major(rho0);
  const double x0_norm = x.cwiseAbs().maxCoeff();
  const int nn = n * n;
  Eigen::SparseMatrix<complexd> identity(nn, nn);
  identity.setIdentity();

  double tau = 0.0;
  while (tau < tau_total) {
    dtau = std::min(dtau, tau_total - tau);
    Eigen::SparseMatrix<complexd> a = identity - dtau * liouvillian.m;
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<complexd>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("time_evolve: implicit step factorization failed");
    }
    x = lu.solve(x);
    tau += dtau;
    dtau *= 1.2;
    const double now = x.cwiseAbs().maxCoeff();
    if (!std::isfinite(now) || now > 1e3 * std::max(x0_norm, 1.0)) {
      throw std::runtime_error("time_evolve: state diverged (instability)");
    }
  }
  return reshape_row_major(x, n);
}

double hermiticity_defect(const Eigen::MatrixXcd& rho) {
  const double scale = rho.cwiseAbs().maxCoeff();
  if (scale == 0) return 0.0;
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double trace_defect(const Eigen::MatrixXcd& rho) {
  return std::abs(rho.trace() - complexd(1, 0));
}

} // namespace cptsim
