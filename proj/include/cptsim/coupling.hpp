#pragma once

// Bichromatic Rabi-coupling matrix under the rotating-wave approximation.
// Field 1 (omega_1) drives the F=3 ground sublevels, field 2 (omega_2) the
// F=4 sublevels; each with the scheme's polarization.  Circular couplings:
//   Omega^{sigma+-}_{st} = -(E/hbar) d_{F F'} <F' m+-1 | F 1 m +-1>
// Linear polarization at angle theta decomposes into circular components
//   Omega^{lin} = (-e^{-i theta} Omega^{sigma+} + e^{+i theta} Omega^{sigma-}) / sqrt(2).

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "cptsim/angular.hpp"
#include "cptsim/levels.hpp"

namespace cptsim {

using complexd = std::complex<double>;

enum class SchemeKind { sigma_plus_pair, sigma_minus_pair, lin_lin };

struct PolarizationScheme {
  SchemeKind kind = SchemeKind::sigma_minus_pair;
  double theta = 0.0; // relative linear-polarization angle, [0, pi); lin_lin only

  static PolarizationScheme sigma_plus() { return {SchemeKind::sigma_plus_pair, 0.0}; }
  static PolarizationScheme sigma_minus() { return {SchemeKind::sigma_minus_pair, 0.0}; }
  static PolarizationScheme lin_parallel() { return {SchemeKind::lin_lin, 0.0}; }
  static PolarizationScheme lin_perpendicular();          // theta = pi/2
  static PolarizationScheme lin_theta(double theta);      // canonicalized to [0, pi)
};

// How the two circular components of a linearly polarized field share the
// field amplitude.  `split` is the physical convention (each component at
// E/sqrt(2), total intensity preserved).  `full` puts the full E on each
// component; it reproduces published calculated amplitude ratios that were
// evidently computed without the 1/sqrt(2) (see README).
enum class LinNormalization { split, full };

struct FieldAmplitudes {
  double e1 = 0.0; // V/m, omega_1 sideband
  double e2 = 0.0; // V/m, omega_2 sideband

  // I = (1/2) c epsilon0 E^2 per sideband; intensities in W/m^2.
  // If `intensities_are_total`, each sideband carries half of the given value.
  static FieldAmplitudes from_intensities(double i1, double i2,
                                          bool intensities_are_total = false);
};

struct CouplingOptions {
  LinNormalization lin_norm = LinNormalization::split;
};

// 32x32 Hermitian coupling matrix (angular frequency).  Only ground-excited
// blocks are nonzero; omega(s,t) with s ground slot, t excited slot holds
// Omega_{st}, and omega(t,s) = conj(Omega_{st}).
struct CouplingMatrix {
  Eigen::MatrixXcd omega = Eigen::MatrixXcd::Zero(n_levels, n_levels);
  complexd ge(int s_index, int t_index) const { // 1-based level indices
    return omega(s_index - 1, t_index - 1);
  }
};

// Per-element Rabi frequencies (s, t are 1-based level indices; s ground,
// t excited; throws std::invalid_argument otherwise).
complexd rabi_sigma_plus(const AtomicData& atom, double e_field, int s, int t,
                         const CgTable& cg = CgTable::shared());
complexd rabi_sigma_minus(const AtomicData& atom, double e_field, int s, int t,
                          const CgTable& cg = CgTable::shared());
complexd rabi_linear(const AtomicData& atom, double e_field, double theta,
                     int s, int t,
                     LinNormalization norm = LinNormalization::split,
                     const CgTable& cg = CgTable::shared());

CouplingMatrix build_bichromatic_coupling(const AtomicData& atom,
                                          const PolarizationScheme& scheme,
                                          const FieldAmplitudes& fields,
                                          const CouplingOptions& options = {},
                                          const CgTable& cg = CgTable::shared());

// Ground sublevels (1-based indices) with zero coupling to every sublevel of
// the tuned excited manifold — the optically dark "trap" states.
std::vector<int> dark_ground_states(const CouplingMatrix& coupling,
                                    int tuned_f_prime);

} // namespace cptsim
