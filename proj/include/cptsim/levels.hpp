#pragma once

// The 32-sublevel structure of the 133Cs D1 line: index bookkeeping,
// Zeeman energies at a static field B (Breit-Rabi closed form applied to
// both manifolds), and the per-sublevel detuning vector for a bichromatic
// drive described by the Raman detuning Delta_R and common detuning
// Delta_opt.
//
// Level labeling (1-based, ascending magnetic quantum number):
//   1..7    6S1/2  F=3,  m = -3..+3
//   8..16   6S1/2  F=4,  m = -4..+4
//   17..23  6P1/2  F'=3, m = -3..+3
//   24..32  6P1/2  F'=4, m = -4..+4
// Vectors/matrices over levels use 0-based slots = index - 1.

#include <Eigen/Dense>
#include <string>

namespace cptsim {

inline constexpr int n_levels = 32;
inline constexpr int n_ground = 16;
inline constexpr int first_excited_slot = 16; // 0-based slot of level 17

enum class Manifold { ground, excited };

struct Sublevel {
  Manifold manifold;
  int f; // 3 or 4
  int m; // -f..f
};

// Fig-style 1..32 index.  Throws std::invalid_argument for invalid (f, m).
int index_of(Manifold manifold, int f, int m);
Sublevel decompose(int index); // index in 1..32

// Atomic structure constants, loaded from the bundled data file.
// Frequencies are angular (rad/s); dipoles in C m.
struct AtomicData {
  double hfs_ground = 0;  // Delta_hfs  (6S1/2)
  double hfs_excited = 0; // Delta'_hfs (6P1/2)
  double nuclear_spin = 0;
  double gj_ground = 0;
  double gj_excited = 0;
  double gi = 0;
  double d33 = 0, d34 = 0, d43 = 0, d44 = 0; // <F||d||F'> for (F,F') pairs

  // Reference energies relative to each electronic state's hyperfine
  // centroid: F = I -/+ 1/2 levels sit at -(9/16) and +(7/16) of the
  // splitting for I = 7/2.
  double omega_g0() const { return -9.0 / 16.0 * hfs_ground; }
  double omega_e0() const { return +7.0 / 16.0 * hfs_ground; }
  // Midpoint of the unperturbed F'=3 and F'=4 energies.
  double omega_i0() const { return -hfs_excited / 16.0; }

  double dipole(int f, int f_prime) const; // d_{F F'}
};

// Loads the data file (plain text, see data/cs133_d1.dat).
AtomicData load_atomic_data(const std::string& path);
// Path resolution: $CPTSIM_DATA_FILE, else the source-tree bundled file.
std::string default_data_file();

// Breit-Rabi energy (angular frequency, relative to the hyperfine centroid)
// of level |F m> of a J = 1/2 electronic state with hyperfine splitting
// `hfs`, electronic/nuclear g-factors, nuclear spin I, at field B (tesla).
double breit_rabi_energy(double hfs, double gj, double gi, double nuclear_spin,
                         int f, int m, double b_tesla);

// 32 Zeeman energies omega_l^B at field B, each manifold relative to its
// own zero-field centroid (consistent with omega_g0/e0/i0 above).
Eigen::VectorXd zeeman_energies(const AtomicData& atom, double b_tesla);

// Per-level detunings delta_l for Raman detuning `delta_r` and common
// detuning `delta_opt` (both angular):
//   ground F=3:  omega_l^B - omega_g0 + Delta_R/2
//   ground F=4:  omega_l^B - omega_e0 - Delta_R/2
//   excited:     omega_l^B - omega_i0 - Delta_opt
Eigen::VectorXd detuning_vector(const AtomicData& atom,
                                const Eigen::VectorXd& omega_b,
                                double delta_r, double delta_opt);

// Common detuning that centers the drive on the chosen excited manifold:
// -Delta'_hfs/2 for F'=3, +Delta'_hfs/2 for F'=4 (plus any user offset).
double delta_opt_for_tuned_level(const AtomicData& atom, int tuned_f_prime,
                                 double extra_offset = 0.0);

} // namespace cptsim
