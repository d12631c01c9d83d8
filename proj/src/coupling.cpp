#include "cptsim/coupling.hpp"

#include "cptsim/constants.hpp"

#include <cmath>
#include <stdexcept>

namespace cptsim {

namespace {

// Validates that s is a ground level and t an excited level (both 1-based),
// returning the decomposed sublevels.
std::pair<Sublevel, Sublevel> check_pair(int s, int t) {
  const Sublevel gs = decompose(s);
  const Sublevel ex = decompose(t);
  if (gs.manifold != Manifold::ground) {
    throw std::invalid_argument("rabi coupling: s must be a ground level (1..16)");
  }
  if (ex.manifold != Manifold::excited) {
    throw std::invalid_argument("rabi coupling: t must be an excited level (17..32)");
  }
  return {gs, ex};
}

complexd rabi_circular(const AtomicData& atom, double e_field, int q, int s,
                       int t, const CgTable& cg) {
  const auto [gs, ex] = check_pair(s, t);
  if (ex.m != gs.m + q) return 0.0;
  const double d = atom.dipole(gs.f, ex.f);
  return -(e_field / constants::hbar) * d * cg.get(ex.f, ex.m, gs.f, gs.m, q);
}

} // namespace

PolarizationScheme PolarizationScheme::lin_perpendicular() {
  return {SchemeKind::lin_lin, 0.5 * constants::pi};
}

PolarizationScheme PolarizationScheme::lin_theta(double theta) {
  double t = std::fmod(theta, constants::pi);
  if (t < 0) t += constants::pi;
  return {SchemeKind::lin_lin, t};
}

FieldAmplitudes FieldAmplitudes::from_intensities(double i1, double i2,
                                                  bool intensities_are_total) {
  if (i1 < 0 || i2 < 0) {
    throw std::invalid_argument("from_intensities: intensities must be >= 0");
  }
  const double share = intensities_are_total ? 0.5 : 1.0;
  const double k = 2.0 / (constants::speed_of_light * constants::epsilon0);
  FieldAmplitudes f;
  f.e1 = std::sqrt(k * share * i1);
  f.e2 = std::sqrt(k * share * i2);
  return f;
}

complexd rabi_sigma_plus(const AtomicData& atom, double e_field, int s, int t,
                         const CgTable& cg) {
  return rabi_circular(atom, e_field, +1, s, t, cg);
}

complexd rabi_sigma_minus(const AtomicData& atom, double e_field, int s, int t,
                          const CgTable& cg) {
  return rabi_circular(atom, e_field, -1, s, t, cg);
}

complexd rabi_linear(const AtomicData& atom, double e_field, double theta,
                     int s, int t, LinNormalization norm, const CgTable& cg) {
  const double component =
      (norm == LinNormalization::split) ? e_field / std::sqrt(2.0) : e_field;
  const complexd plus = rabi_circular(atom, component, +1, s, t, cg);
  const complexd minus = rabi_circular(atom, component, -1, s, t, cg);
  const complexd i(0.0, 1.0);
  return -std::exp(-i * theta) * plus + std::exp(i * theta) * minus;
}

CouplingMatrix build_bichromatic_coupling(const AtomicData& atom,
                                          const PolarizationScheme& scheme,
                                          const FieldAmplitudes& fields,
                                          const CouplingOptions& options,
                                          const CgTable& cg) {
  CouplingMatrix c;
  for (int s = 1; s <= n_ground; ++s) {
    const Sublevel gs = decompose(s);
    // Rotating-wave pairing: the omega_1 sideband addresses F=3, omega_2
    // addresses F=4.
    const double e = (gs.f == 3) ? fields.e1 : fields.e2;
    for (int t = n_ground + 1; t <= n_levels; ++t) {
      complexd omega;
      switch (scheme.kind) {
        case SchemeKind::sigma_plus_pair:
          omega = rabi_sigma_plus(atom, e, s, t, cg);
          break;
        case SchemeKind::sigma_minus_pair:
          omega = rabi_sigma_minus(atom, e, s, t, cg);
          break;
        case SchemeKind::lin_lin: {
          // Relative angle theta is carried by the omega_2 field.
          const double angle = (gs.f == 3) ? 0.0 : scheme.theta;
          omega = rabi_linear(atom, e, angle, s, t, options.lin_norm, cg);
          break;
        }
      }
      c.omega(s - 1, t - 1) = omega;
      c.omega(t - 1, s - 1) = std::conj(omega);
    }
  }
  return c;
}

std::vector<int> dark_ground_states(const CouplingMatrix& coupling,
                                    int tuned_f_prime) {
  if (tuned_f_prime != 3 && tuned_f_prime != 4) {
    throw std::invalid_argument("dark_ground_states: tuned level must be 3 or 4");
  }
  // Threshold relative to the largest coupling element; exact zeros come out
  // at machine precision, so any small factor works.
  double max_abs = 0.0;
  for (int s = 1; s <= n_ground; ++s)
    for (int t = n_ground + 1; t <= n_levels; ++t)
      max_abs = std::max(max_abs, std::abs(coupling.ge(s, t)));
  const double tol = max_abs * 1e-12;

  std::vector<int> dark;
  for (int s = 1; s <= n_ground; ++s) {
    bool coupled = false;
    for (int t = n_ground + 1; t <= n_levels; ++t) {
      if (decompose(t).f != tuned_f_prime) continue;
      if (std::abs(coupling.ge(s, t)) > tol) {
        coupled = true;
        break;
      }
    }
    if (!coupled) dark.push_back(s);
  }
  return dark;
}

} // namespace cptsim
