#include "cptsim/levels.hpp"

#include "cptsim/constants.hpp"
#include "cptsim/datafile.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cptsim {

int index_of(Manifold manifold, int f, int m) {
  if (f != 3 && f != 4) throw std::invalid_argument("index_of: f must be 3 or 4");
  if (m < -f || m > f) throw std::invalid_argument("index_of: |m| must be <= f");
  const int base = (manifold == Manifold::ground) ? 0 : n_ground;
  if (f == 3) return base + (m + 3) + 1;   // 7 sublevels first
  return base + 7 + (m + 4) + 1;           // then 9 sublevels
}

Sublevel decompose(int index) {
  if (index < 1 || index > n_levels) {
    throw std::invalid_argument("decompose: index must be in 1..32");
  }
  Sublevel s;
  int i = index - 1;
  s.manifold = (i < n_ground) ? Manifold::ground : Manifold::excited;
  if (i >= n_ground) i -= n_ground;
  if (i < 7) {
    s.f = 3;
    s.m = i - 3;
  } else {
    s.f = 4;
    s.m = (i - 7) - 4;
  }
  return s;
}

double AtomicData::dipole(int f, int f_prime) const {
  if (f == 3 && f_prime == 3) return d33;
  if (f == 3 && f_prime == 4) return d34;
  if (f == 4 && f_prime == 3) return d43;
  if (f == 4 && f_prime == 4) return d44;
  throw std::invalid_argument("dipole: f and f' must be 3 or 4");
}

AtomicData load_atomic_data(const std::string& path) {
  const KeyValueDocument doc = KeyValueDocument::parse_file(path);
  AtomicData a;
  a.hfs_ground = doc.require_number("hfs_ground");
  a.hfs_excited = doc.require_number("hfs_excited");
  a.nuclear_spin = doc.require_number("nuclear_spin");
  a.gj_ground = doc.require_number("g_j_ground");
  a.gj_excited = doc.require_number("g_j_excited");
  a.gi = doc.require_number("g_i");
  a.d33 = doc.require_number("dipole_33");
  a.d34 = doc.require_number("dipole_34");
  a.d43 = doc.require_number("dipole_43");
  a.d44 = doc.require_number("dipole_44");
  if (a.hfs_ground <= 0 || a.hfs_excited <= 0) {
    throw std::runtime_error("atomic data: hyperfine splittings must be positive");
  }
  if (a.nuclear_spin != 3.5) {
    throw std::runtime_error("atomic data: this model requires nuclear spin 7/2");
  }
  return a;
}

std::string default_data_file() {
  if (const char* env = std::getenv("CPTSIM_DATA_FILE")) return env;
#ifdef CPTSIM_SOURCE_DATA_FILE
  return CPTSIM_SOURCE_DATA_FILE;
#else
  return "data/cs133_d1.dat";
#endif
}

double breit_rabi_energy(double hfs, double gj, double gi, double nuclear_spin,
                         int f, int m, double b_tesla) {
  const double i = nuclear_spin;
  const int f_low = static_cast<int>(std::lround(i - 0.5));
  const int f_high = static_cast<int>(std::lround(i + 0.5));
  if (f != f_low && f != f_high) {
    throw std::invalid_argument("breit_rabi_energy: f must be I +/- 1/2");
  }
  if (std::abs(m) > f) throw std::invalid_argument("breit_rabi_energy: |m| > f");

  const double mu_over_hbar = constants::bohr_magneton / constants::hbar;
  const double x = (gj - gi) * mu_over_hbar * b_tesla / hfs;
  const double common = -hfs / (2.0 * (2.0 * i + 1.0)) +
                        gi * mu_over_hbar * m * b_tesla;
  const double sign = (f == f_high) ? +1.0 : -1.0;

  // Stretched states of the upper manifold: the square root collapses to
  // |1 +/- x| exactly; evaluate it that way to avoid cancellation.
  if (f == f_high && std::abs(m) == f_high) {
    const double s = (m > 0) ? 1.0 : -1.0;
    return common + 0.5 * hfs * std::abs(1.0 + s * x);
  }
  const double radicand = 1.0 + 4.0 * m * x / (2.0 * i + 1.0) + x * x;
  return common + sign * 0.5 * hfs * std::sqrt(radicand);
}

Eigen::VectorXd zeeman_energies(const AtomicData& atom, double b_tesla) {
  Eigen::VectorXd omega(n_levels);
  for (int idx = 1; idx <= n_levels; ++idx) {
    const Sublevel s = decompose(idx);
    const bool ground = s.manifold == Manifold::ground;
    omega[idx - 1] = breit_rabi_energy(
        ground ? atom.hfs_ground : atom.hfs_excited,
        ground ? atom.gj_ground : atom.gj_excited, atom.gi, atom.nuclear_spin,
        s.f, s.m, b_tesla);
  }
  return omega;
}

Eigen::VectorXd detuning_vector(const AtomicData& atom,
                                const Eigen::VectorXd& omega_b, double delta_r,
                                double delta_opt) {
  if (omega_b.size() != n_levels) {
    throw std::invalid_argument("detuning_vector: omega_b must have 32 entries");
  }
  Eigen::VectorXd delta(n_levels);
  for (int idx = 1; idx <= n_levels; ++idx) {
    const Sublevel s = decompose(idx);
    if (s.manifold == Manifold::ground) {
      delta[idx - 1] = (s.f == 3)
                           ? omega_b[idx - 1] - atom.omega_g0() + 0.5 * delta_r
                           : omega_b[idx - 1] - atom.omega_e0() - 0.5 * delta_r;
    } else {
      delta[idx - 1] = omega_b[idx - 1] - atom.omega_i0() - delta_opt;
    }
  }
  return delta;
}

double delta_opt_for_tuned_level(const AtomicData& atom, int tuned_f_prime,
                                 double extra_offset) {
  if (tuned_f_prime == 3) return -0.5 * atom.hfs_excited + extra_offset;
  if (tuned_f_prime == 4) return +0.5 * atom.hfs_excited + extra_offset;
  throw std::invalid_argument("delta_opt_for_tuned_level: tuned level must be 3 or 4");
}

} // namespace cptsim
