#pragma once

// Physical outputs derived from a steady-state density matrix: total excited
// population (two algebraically independent forms), the transmittance budget
// split into one-photon and two-photon (CPT) contributions, and the CPT
// amplitude of a scanned resonance.

#include <Eigen/Dense>
#include <vector>

#include "cptsim/solver.hpp"

namespace cptsim {

// Sum of excited-state populations (levels 17..32).
double excited_population(const Eigen::MatrixXcd& rho);

// Steady-state identity: rho_nn = -sum_l Im(Omega_nl rho_ln) / Gamma_n.
// Agreement with `excited_population` cross-checks the solve.
double excited_population_via_coupling(const Eigen::MatrixXcd& rho,
                                       const Eigen::MatrixXcd& coupling,
                                       const Eigen::VectorXd& decay);

struct AbsorptionBudget {
  double alpha = 1.0;          // overall scale (atom number / beam geometry)
  double transmittance = 1.0;  // T = 1 - one_photon + cpt_term
  double one_photon = 0.0;     // sum of F1(l, i) terms
  double cpt_term = 0.0;       // sum of F2(g, e) terms + residual coherences
  double coherence_rest = 0.0; // same-manifold + excited-excited part of cpt_term
  double direct_absorption = 0.0; // alpha * (total excited population)
  // F2 contribution attributed to each cross-manifold ground pair:
  // rows g = levels 1..7, cols e = levels 8..16.
  Eigen::MatrixXd f2_pairs = Eigen::MatrixXd::Zero(7, 9);
};

// Exact budget decomposition of 1 - T at steady state.  The split
// reconstructs each optical coherence from the steady-state relation and
// partitions it into a population (one-photon) part, ground-pair coherence
// (CPT) parts, and a residual; the buckets sum to the direct absorption to
// solver precision.
AbsorptionBudget transmittance(const Eigen::MatrixXcd& rho,
                               const LevelSystem& system, double alpha = 1.0);

// |on-peak - baseline| for a sampled spectrum.  `values` are observable
// samples ordered by detuning; the baseline is the median of the outer 10%
// of samples (both ends), which is robust to neighboring resonance tails.
// `peak_index` selects the resonance sample.
double cpt_amplitude(const std::vector<double>& values, int peak_index);
double spectrum_baseline(const std::vector<double>& values);

} // namespace cptsim
