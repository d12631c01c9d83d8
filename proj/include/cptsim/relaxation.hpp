#pragma once

// Decay and repopulation model.  All 16 ground sublevels decay at gamma_p,
// all 16 excited sublevels at Gamma.  Population returns to the ground
// manifold through three channels:
//   - uniform ground redistribution (rate fraction r, weight 1/15 to each
//     other ground sublevel),
//   - magnetic-dipole (M1) ground redistribution (fraction 1-r, weights
//     proportional to squared dipole coupling coefficients),
//   - excited -> ground optical branching with weights proportional to the
//     2/3 power of the normalized dipole matrix element.
// Influx into excited sublevels is neglected.

#include <Eigen/Dense>

#include "cptsim/angular.hpp"
#include "cptsim/levels.hpp"

namespace cptsim {

struct RelaxationConfig {
  double gamma_p = 0.0;   // ground decay rate (angular)
  double big_gamma = 0.0; // excited decay rate (angular)
  double r = 1.0;         // uniform fraction of ground relaxation, [0, 1]
};

struct BranchingTable {
  // t2(n, l): normalized squared optical dipole element from excited slot n
  // (0..15 for levels 17..32) to ground slot l; rows sum to 1.
  Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(n_ground, n_ground);
  // w(n, l): excited->ground branching weights, rows sum to 1.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_ground, n_ground);
  // m1(m, l): ground->ground magnetic-dipole redistribution kernel.
  // Zero diagonal, symmetric, doubly stochastic (rows and columns sum to 1,
  // so a uniform population distribution is an exact fixed point).
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(n_ground, n_ground);
};

BranchingTable build_branching(const AtomicData& atom,
                               const CgTable& cg = CgTable::shared());

// 32 decay rates: gamma_p for ground slots, Gamma for excited slots.
Eigen::VectorXd decay_vector(const RelaxationConfig& config);

// 32x32 influx-coefficient matrix S: the population influx into level l is
// Lambda_l = sum_m S(l, m) rho_mm.  Rows 17..32 are zero.  For ground l:
//   S(l, m) = [r/15 + (1-r) m1(m, l)] gamma_p   (m ground, m != l)
//   S(l, n) = w(n, l) Gamma                     (n excited)
Eigen::MatrixXd source_coefficients(const RelaxationConfig& config,
                                    const BranchingTable& branching);

// Influx vector Lambda for a given density matrix (uses populations only).
Eigen::VectorXd source_influx(const Eigen::MatrixXd& coefficients,
                              const Eigen::MatrixXcd& rho);

} // namespace cptsim
