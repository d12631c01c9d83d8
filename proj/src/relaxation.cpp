#include "cptsim/relaxation.hpp"

#include <cmath>
#include <stdexcept>

namespace cptsim {

namespace {

// Squared coupling coefficient summed over polarization between two ground
// sublevels, with the 1/(2F_l+1) degeneracy factor that makes the kernel
// exactly symmetric: cg(F_m m_m; 1 q | F_l m_l)^2 / (2F_l+1).
double symmetric_m1_element(const Sublevel& from, const Sublevel& to,
                            const CgTable& cg) {
  const int q = to.m - from.m;
  if (std::abs(q) > 1) return 0.0;
  const double c = cg.get(to.f, to.m, from.f, from.m, q);
  return c * c / (2.0 * to.f + 1.0);
}

} // namespace

BranchingTable build_branching(const AtomicData& atom, const CgTable& cg) {
  BranchingTable b;

  // Optical: squared dipole elements from each excited sublevel to each
  // ground sublevel, row-normalized.
  for (int n = 0; n < n_ground; ++n) {
    const Sublevel ex = decompose(n_ground + n + 1);
    for (int l = 0; l < n_ground; ++l) {
      const Sublevel gs = decompose(l + 1);
      const int q = ex.m - gs.m;
      if (std::abs(q) > 1) continue;
      const double el = atom.dipole(gs.f, ex.f) * cg.get(ex.f, ex.m, gs.f, gs.m, q);
      b.t2(n, l) = el * el;
    }
    const double row = b.t2.row(n).sum();
    if (row <= 0) throw std::runtime_error("build_branching: excited level with no decay path");
    b.t2.row(n) /= row;
  }

  // Branching weights: 2/3 power of the normalized dipole element
  // (= cube root of t2), row-normalized.
  for (int n = 0; n < n_ground; ++n) {
    for (int l = 0; l < n_ground; ++l) {
      b.w(n, l) = (b.t2(n, l) > 0) ? std::cbrt(b.t2(n, l)) : 0.0;
    }
    b.w.row(n) /= b.w.row(n).sum();
  }

  // Ground-ground magnetic-dipole kernel: symmetric zero-diagonal seed,
  // Sinkhorn-balanced to a doubly stochastic matrix so a uniform population
  // distribution is an exact fixed point.
  Eigen::MatrixXd seed = Eigen::MatrixXd::Zero(n_ground, n_ground);
  for (int m = 0; m < n_ground; ++m) {
    const Sublevel from = decompose(m + 1);
    for (int l = 0; l < n_ground; ++l) {
      if (l == m) continue;
      seed(m, l) = symmetric_m1_element(from, decompose(l + 1), cg);
    }
  }
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n_ground);
  for (int iter = 0; iter < 10000; ++iter) {
    const Eigen::VectorXd rs =
        (d.asDiagonal() * seed * d.asDiagonal()).rowwise().sum();
    if (((rs.array() - 1.0).abs() < 1e-15).all()) break;
    d = d.array() / rs.array().sqrt();
  }
  b.m1 = d.asDiagonal() * seed * d.asDiagonal();
  return b;
}

Eigen::VectorXd decay_vector(const RelaxationConfig& config) {
  if (config.gamma_p < 0 || config.big_gamma <= 0) {
    throw std::invalid_argument("decay_vector: rates must be gamma_p >= 0, Gamma > 0");
  }
  Eigen::VectorXd g(n_levels);
  g.head(n_ground).setConstant(config.gamma_p);
  g.tail(n_levels - n_ground).setConstant(config.big_gamma);
  return g;
}

Eigen::MatrixXd source_coefficients(const RelaxationConfig& config,
                                    const BranchingTable& branching) {
  if (config.r < 0 || config.r > 1) {
    throw std::invalid_argument("source_coefficients: r must be in [0, 1]");
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_levels, n_levels);
  for (int l = 0; l < n_ground; ++l) {
    for (int m = 0; m < n_ground; ++m) {
      if (m == l) continue;
      s(l, m) = (config.r / 15.0 + (1.0 - config.r) * branching.m1(m, l)) *
                config.gamma_p;
    }
    for (int n = 0; n < n_ground; ++n) {
      s(l, n_ground + n) = branching.w(n, l) * config.big_gamma;
    }
  }
  return s;
}

Eigen::VectorXd source_influx(const Eigen::MatrixXd& coefficients,
                              const Eigen::MatrixXcd& rho) {
  const int n = static_cast<int>(coefficients.rows());
  Eigen::VectorXd influx = Eigen::VectorXd::Zero(n);
  for (int l = 0; l < n; ++l) {
    for (int m = 0; m < n; ++m) {
      if (coefficients(l, m) != 0.0) {
        influx[l] += coefficients(l, m) * rho(m, m).real();
      }
    }
  }
  return influx;
}

} // namespace cptsim
