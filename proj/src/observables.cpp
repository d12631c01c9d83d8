#include "cptsim/observables.hpp"

#include "cptsim/levels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cptsim {

double excited_population(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != n_levels || rho.cols() != n_levels) {
    throw std::invalid_argument("excited_population: expected a 32x32 density matrix");
  }
  double pop = 0.0;
  for (int k = first_excited_slot; k < n_levels; ++k) pop += rho(k, k).real();
  return pop;
}

double excited_population_via_coupling(const Eigen::MatrixXcd& rho,
                                       const Eigen::MatrixXcd& coupling,
                                       const Eigen::VectorXd& decay) {
  if (rho.rows() != n_levels || coupling.rows() != n_levels ||
      decay.size() != n_levels) {
    throw std::invalid_argument("excited_population_via_coupling: dimension mismatch");
  }
  // Steady state of each excited population:
  //   0 = -G_n rho_nn + (i/2)[O rho - rho O]_nn
  //   => rho_nn = -Im( sum_l O_nl rho_ln ) / G_n.
  double pop = 0.0;
  for (int n = first_excited_slot; n < n_levels; ++n) {
    complexd drive(0, 0);
    for (int l = 0; l < n_levels; ++l) drive += coupling(n, l) * rho(l, n);
    pop += -drive.imag() / decay[n];
  }
  return pop;
}

AbsorptionBudget transmittance(const Eigen::MatrixXcd& rho,
                               const LevelSystem& system, double alpha) {
  if (system.levels() != n_levels || rho.rows() != n_levels) {
    throw std::invalid_argument("transmittance: expected the 32-level system");
  }
  AbsorptionBudget budget;
  budget.alpha = alpha;
  budget.direct_absorption = alpha * excited_population(rho);

  const Eigen::MatrixXcd& omega = system.coupling;
  const complexd half_i(0.0, 0.5);

  // Each optical line (ground l, excited i) absorbs
  //   -(alpha/G_i) Im( O_il rho_li ).
  // The steady-state relation reconstructs rho_li from the drive terms:
  //   rho_li = (i/2) Num_li / (g_li + i (d_l - d_i)),
  //   Num_li = sum_k O_lk rho_ki - sum_k rho_lk O_ki.
  // Splitting Num_li by the origin of each term partitions the absorption
  // exactly: population difference -> one-photon; cross-manifold ground
  // coherences -> two-photon (CPT) pairs; everything else -> residual.
  for (int l = 0; l < n_ground; ++l) {
    const Sublevel gs = decompose(l + 1);
    for (int i = first_excited_slot; i < n_levels; ++i) {
      const complexd o_li = omega(l, i);
      if (o_li == complexd(0, 0)) continue;
      const complexd denom(0.5 * (system.decay[l] + system.decay[i]),
                           system.detuning[l] - system.detuning[i]);
      const complexd o_il = omega(i, l);
      const double gamma_i = system.decay[i];
      const auto contribution = [&](const complexd& numerator_part) {
        const complexd rho_part = half_i * numerator_part / denom;
        return -(alpha / gamma_i) * (o_il * rho_part).imag();
      };

      // Population part: k = i in the first sum, k = l in the second.
      budget.one_photon +=
          contribution(o_li * rho(i, i) - rho(l, l) * o_li);

      // Ground coherences: second sum, k = v ground, v != l.
      for (int v = 0; v < n_ground; ++v) {
        if (v == l) continue;
        const complexd o_vi = omega(v, i);
        if (o_vi == complexd(0, 0)) continue;
        const double reduction = -contribution(-rho(l, v) * o_vi);
        const Sublevel vs = decompose(v + 1);
        if (vs.f != gs.f) {
          // Cross-manifold pair (g in F=3, e in F=4), order-independent.
          const int g_level = (gs.f == 3) ? l + 1 : v + 1;
          const int e_level = (gs.f == 3) ? v + 1 : l + 1;
          budget.f2_pairs(g_level - 1, e_level - 8) += reduction;
        } else {
          budget.coherence_rest += reduction;
        }
      }

      // Excited-excited coherences: first sum, k = u excited, u != i.
      for (int u = first_excited_slot; u < n_levels; ++u) {
        if (u == i) continue;
        const complexd o_lu = omega(l, u);
        if (o_lu == complexd(0, 0)) continue;
        budget.coherence_rest += -contribution(o_lu * rho(u, i));
      }
    }
  }
  budget.cpt_term = budget.f2_pairs.sum() + budget.coherence_rest;
  budget.transmittance = 1.0 - budget.one_photon + budget.cpt_term;
  return budget;
}

double spectrum_baseline(const std::vector<double>& values) {
  if (values.empty()) {
    throw std::invalid_argument("spectrum_baseline: empty spectrum");
  }
  const size_t n = values.size();
  const size_t per_side = std::max<size_t>(1, n / 20);
  std::vector<double> outer;
  outer.reserve(2 * per_side);
  for (size_t k = 0; k < per_side && k < n; ++k) outer.push_back(values[k]);
  for (size_t k = n >= per_side ? n - per_side : 0; k < n; ++k) {
    outer.push_back(values[k]);
  }
  std::sort(outer.begin(), outer.end());
  const size_t mid = outer.size() / 2;
  if (outer.size() % 2 == 1) return outer[mid];
  return 0.5 * (outer[mid - 1] + outer[mid]);
}

double cpt_amplitude(const std::vector<double>& values, int peak_index) {
  if (peak_index < 0 || peak_index >= static_cast<int>(values.size())) {
    throw std::invalid_argument("cpt_amplitude: peak index out of range");
  }
  return std::abs(values[static_cast<size_t>(peak_index)] -
                  spectrum_baseline(values));
}

} // namespace cptsim
