#include "cptsim/validate.hpp"

#include "cptsim/constants.hpp"
#include "cptsim/coupling.hpp"
#include "cptsim/lineshape.hpp"
#include "cptsim/observables.hpp"
#include "cptsim/relaxation.hpp"
#include "cptsim/scan.hpp"
#include "cptsim/solver.hpp"

#include <cmath>
#include <complex>
#include <random>

namespace cptsim {

namespace {

using constants::two_pi;

void push(std::vector<ValidationCheck>& checks, const std::string& name,
          double residual, double base_bound, double tolerance_scale) {
  ValidationCheck c;
  c.name = name;
  c.residual = residual;
  c.bound = base_bound * tolerance_scale;
  c.passed = residual <= c.bound;
  checks.push_back(c);
}

LevelSystem build_system(const AtomicData& atom, const RelaxationConfig& cell,
                         const PolarizationScheme& scheme, int tuned_f_prime,
                         double b_tesla, double i1, double i2,
                         double detuning_hz, const BranchingTable& branching) {
  LevelSystem system;
  system.decay = decay_vector(cell);
  system.source = source_coefficients(cell, branching);
  system.coupling = build_bichromatic_coupling(
                        atom, scheme, FieldAmplitudes::from_intensities(i1, i2))
                        .omega;
  const Eigen::VectorXd omega_b = zeeman_energies(atom, b_tesla);
  const double delta_r = 2.0 * two_pi * detuning_hz;
  system.detuning = detuning_vector(
      atom, omega_b, delta_r, delta_opt_for_tuned_level(atom, tuned_f_prime));
  return system;
}

// Modulation-axis resonance center (Hz) from the Breit-Rabi energies.
double breit_rabi_center_hz(const AtomicData& atom, int mg, int me,
                            double b_tesla) {
  const double e3 = breit_rabi_energy(atom.hfs_ground, atom.gj_ground, atom.gi,
                                      atom.nuclear_spin, 3, mg, b_tesla);
  const double e4 = breit_rabi_energy(atom.hfs_ground, atom.gj_ground, atom.gi,
                                      atom.nuclear_spin, 4, me, b_tesla);
  return (e4 - e3 - atom.hfs_ground) / (2.0 * two_pi);
}

} // namespace

std::vector<ValidationCheck> run_validation(const AtomicData& atom,
                                            const ValidationOptions& options) {
  std::vector<ValidationCheck> checks;
  const double ts = options.tolerance_scale;
  std::mt19937_64 rng(options.seed);

  // --- angular-momentum table vs direct Racah evaluation ------------------
  {
    CgTable table;
    if (options.inject_cg_fault) {
      table.perturb(4, 1, 3, 0, 1, options.cg_fault_epsilon);
    }
    push(checks, "cg-table-vs-racah", table.max_deviation_from_racah(), 1e-13,
         ts);
  }

  // --- CG completeness: sum over the full F' multiplet of squared
  //     coefficients equals 1 for every (F, m, q) -------------------------
  {
    double worst = 0.0;
    for (int f : {3, 4}) {
      for (int m = -f; m <= f; ++m) {
        for (int q = -1; q <= 1; ++q) {
          double sum = 0.0;
          for (int fp = f - 1; fp <= f + 1; ++fp) {
            const double c = clebsch_gordan_racah(f, m, 1, q, fp, m + q);
            sum += c * c;
          }
          worst = std::max(worst, std::abs(sum - 1.0));
        }
      }
    }
    push(checks, "cg-completeness", worst, 1e-12, ts);
  }

  // --- Breit-Rabi stretched states: the closed form must reduce to the
  //     exact linear expression at m = +-(I + 1/2) -------------------------
  {
    double worst = 0.0;
    const double mu_over_hbar = constants::bohr_magneton / constants::hbar;
    for (double b : {50e-6, 285e-6, 1e-3}) {
      for (int variant = 0; variant < 2; ++variant) {
        const double hfs = variant == 0 ? atom.hfs_ground : atom.hfs_excited;
        const double gj = variant == 0 ? atom.gj_ground : atom.gj_excited;
        const double x = (gj - atom.gi) * mu_over_hbar * b / hfs;
        for (int m : {-4, 4}) {
          const double linear = -hfs / 16.0 + atom.gi * mu_over_hbar * m * b +
                                hfs / 2.0 * (1.0 + (m > 0 ? x : -x));
          const double exact = breit_rabi_energy(hfs, gj, atom.gi,
                                                 atom.nuclear_spin, 4, m, b);
          worst = std::max(worst, std::abs(exact - linear) / (hfs / 2.0));
        }
      }
    }
    push(checks, "breit-rabi-stretched", worst, 1e-12, ts);
  }

  const BranchingTable branching = build_branching(atom);

  // --- branching normalization: optical rows, branching rows, and the
  //     doubly stochastic symmetric ground kernel --------------------------
  {
    double worst = 0.0;
    for (int nrow = 0; nrow < n_ground; ++nrow) {
      worst = std::max(worst, std::abs(branching.t2.row(nrow).sum() - 1.0));
      worst = std::max(worst, std::abs(branching.w.row(nrow).sum() - 1.0));
      worst = std::max(worst, std::abs(branching.m1.row(nrow).sum() - 1.0));
      worst = std::max(worst, std::abs(branching.m1.col(nrow).sum() - 1.0));
    }
    worst = std::max(
        worst, (branching.m1 - branching.m1.transpose()).cwiseAbs().maxCoeff());
    push(checks, "branching-normalization", worst, 1e-12, ts);
  }

  const RelaxationConfig cell{two_pi * 107.0, two_pi * 0.51e9, 0.6};

  // --- source flux balance: the total influx generated by one unit of
  //     population in level m equals that level's decay rate ---------------
  {
    const Eigen::MatrixXd source = source_coefficients(cell, branching);
    const Eigen::VectorXd decay = decay_vector(cell);
    double worst = 0.0;
    for (int m = 0; m < n_levels; ++m) {
      worst = std::max(
          worst, std::abs(source.col(m).sum() - decay(m)) / decay(m));
    }
    push(checks, "source-flux-balance", worst, 1e-12, ts);
  }

  // --- no light: the steady state is the uniform ground distribution ------
  {
    LevelSystem system = build_system(atom, cell,
                                      PolarizationScheme::sigma_minus(), 4,
                                      139e-6, 0.0, 0.0, 0.0, branching);
    const Eigen::MatrixXcd rho = steady_state(assemble(system));
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(n_levels, n_levels);
    for (int l = 0; l < n_ground; ++l) expected(l, l) = 1.0 / 16.0;
    push(checks, "no-light-uniform-state",
         (rho - expected).cwiseAbs().maxCoeff(), 1e-10, ts);
  }

  // --- vectorized Liouvillian vs direct element equations -----------------
  {
    LevelSystem system = build_system(atom, cell,
                                      PolarizationScheme::sigma_minus(), 4,
                                      139e-6, 6.6, 6.6, 413.0, branching);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd g(n_levels, n_levels);
    for (int i = 0; i < n_levels; ++i) {
      for (int j = 0; j < n_levels; ++j) {
        g(i, j) = complexd(gauss(rng), gauss(rng));
      }
    }
    Eigen::MatrixXcd rho = (g + g.adjoint()) / 2.0;
    rho /= rho.cwiseAbs().maxCoeff();

    const Liouvillian liouvillian = assemble(system);
    Eigen::VectorXcd flat(n_levels * n_levels);
    for (int i = 0; i < n_levels; ++i) {
      for (int j = 0; j < n_levels; ++j) flat(i * n_levels + j) = rho(i, j);
    }
    const Eigen::VectorXcd image = liouvillian.m * flat * liouvillian.scale;
    Eigen::MatrixXcd from_matrix(n_levels, n_levels);
    for (int i = 0; i < n_levels; ++i) {
      for (int j = 0; j < n_levels; ++j) {
        from_matrix(i, j) = image(i * n_levels + j);
      }
    }
    const Eigen::MatrixXcd direct = apply_equations_of_motion(system, rho);
    const double residual = (from_matrix - direct).cwiseAbs().maxCoeff() /
                            direct.cwiseAbs().maxCoeff();
    push(checks, "liouvillian-assembly", residual, 1e-12, ts);
  }

  // --- hand-solved symmetric resonant Lambda system ------------------------
  {
    const double gp = two_pi * 200.0;
    const double gamma = two_pi * 1.0e6;
    const double omega = two_pi * 5.0e3;
    LevelSystem system;
    system.decay = Eigen::Vector3d(gp, gp, gamma);
    system.detuning = Eigen::Vector3d::Zero();
    system.coupling = Eigen::MatrixXcd::Zero(3, 3);
    system.coupling(0, 2) = system.coupling(2, 0) = omega;
    system.coupling(1, 2) = system.coupling(2, 1) = omega;
    system.source = Eigen::MatrixXd::Zero(3, 3);
    system.source(0, 1) = system.source(1, 0) = gp;
    system.source(0, 2) = system.source(1, 2) = gamma / 2.0;

    const Eigen::MatrixXcd rho = steady_state(assemble(system));

    const double gamma_f = (gp + gamma) / 2.0;
    const double k = omega * omega / (2.0 * gamma_f);
    const double d = gp * gamma + 2.0 * gp * k + k * gamma;
    const double p = d / (2.0 * d + 2.0 * k * gp);
    const double pe = 2.0 * k * gp * p / d;
    const double x12 = -k * gamma * p / d;
    const double im_c = -(omega / (2.0 * gamma_f)) * (p + x12 - pe);

    double worst = 0.0;
    worst = std::max(worst, std::abs(rho(0, 0) - complexd(p, 0)));
    worst = std::max(worst, std::abs(rho(1, 1) - complexd(p, 0)));
    worst = std::max(worst, std::abs(rho(2, 2) - complexd(pe, 0)));
    worst = std::max(worst, std::abs(rho(0, 1) - complexd(x12, 0)));
    worst = std::max(worst, std::abs(rho(0, 2) - complexd(0, im_c)));
    worst = std::max(worst, std::abs(rho(1, 2) - complexd(0, im_c)));
    push(checks, "three-level-lambda-oracle", worst, 1e-10, ts);
  }

  // --- steady state vs long time evolution on randomized configurations ---
  {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < options.randomized_configs; ++i) {
      const int scheme_pick = static_cast<int>(u01(rng) * 4) % 4;
      PolarizationScheme scheme;
      switch (scheme_pick) {
        case 0: scheme = PolarizationScheme::sigma_plus(); break;
        case 1: scheme = PolarizationScheme::sigma_minus(); break;
        case 2: scheme = PolarizationScheme::lin_parallel(); break;
        default: scheme = PolarizationScheme::lin_perpendicular(); break;
      }
      const int tuned = u01(rng) < 0.5 ? 3 : 4;
      const double b = 20e-6 + 280e-6 * u01(rng);
      const double i1 = 0.5 + 7.5 * u01(rng);
      const double i2 = 0.5 + 7.5 * u01(rng);
      const double x_hz = -2000.0 + 4000.0 * u01(rng);
      RelaxationConfig rand_cell;
      rand_cell.gamma_p = two_pi * (100.0 + 24900.0 * u01(rng));
      rand_cell.big_gamma = two_pi * (0.3e9 + 1.4e9 * u01(rng));
      rand_cell.r = u01(rng);

      LevelSystem system = build_system(atom, rand_cell, scheme, tuned, b, i1,
                                        i2, x_hz, branching);
      const Liouvillian liouvillian = assemble(system);
      const Eigen::MatrixXcd rho_ss = steady_state(liouvillian);

      Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(n_levels, n_levels);
      for (int l = 0; l < n_ground; ++l) rho0(l, l) = 1.0 / 16.0;
      const Eigen::MatrixXcd rho_ev =
          time_evolve(liouvillian, rho0, 100.0 / rand_cell.gamma_p,
                      0.05 / rand_cell.big_gamma);
      worst = std::max(worst, (rho_ss - rho_ev).cwiseAbs().maxCoeff());
    }
    push(checks, "steady-vs-time-evolution", worst, 1e-6, ts);
  }

  // --- observables on a representative driven steady state ----------------
  {
    LevelSystem system = build_system(atom, cell,
                                      PolarizationScheme::sigma_minus(), 4,
                                      139e-6, 6.6, 6.6, 413.0, branching);
    const Eigen::MatrixXcd rho = steady_state(assemble(system));

    const double ep = excited_population(rho);
    const double ep_alt =
        excited_population_via_coupling(rho, system.coupling, system.decay);
    push(checks, "excited-population-identity", std::abs(ep - ep_alt), 1e-9,
         ts);

    const AbsorptionBudget budget = transmittance(rho, system, 1.0);
    const double budget_residual =
        std::abs(budget.one_photon - budget.cpt_term -
                 budget.direct_absorption) /
        budget.direct_absorption;
    push(checks, "transmittance-budget", budget_residual, 1e-9, ts);

    push(checks, "trace-preservation", trace_defect(rho), 1e-10, ts);
    push(checks, "hermiticity", hermiticity_defect(rho), 1e-12, ts);
  }

  // --- analytic lineshape vs full solver on an isolated weak resonance ----
  {
    ScanConfig config;
    config.cell = cell;
    config.b_field = 285e-6;
    config.scheme = PolarizationScheme::lin_parallel();
    config.tuned_f_prime = 3;
    config.intensity1 = config.intensity2 = 0.4;
    const int mg = -1, me = 1;
    const double center = breit_rabi_center_hz(atom, mg, me, config.b_field);
    config.scan_min_hz = center - 600.0;
    config.scan_max_hz = center + 600.0;
    config.points = 241;
    const SpectrumScan scan = run_scan(atom, config);

    const Peak* found = nullptr;
    for (const Peak& peak : scan.peaks) {
      if (peak.labeled && peak.mg == mg && peak.me == me) found = &peak;
    }

    const LevelSystem system =
        build_system(atom, cell, config.scheme, config.tuned_f_prime,
                     config.b_field, config.intensity1, config.intensity2,
                     center, branching);
    const double gamma_f = (cell.gamma_p + cell.big_gamma) / 2.0;
    const LambdaSystem lambda{index_of(Manifold::ground, 3, mg),
                              index_of(Manifold::ground, 4, me)};
    const double width = lineshape_width(lambda, system.coupling,
                                         system.detuning, cell.gamma_p,
                                         gamma_f);
    const double shift = light_shift(lambda, system.coupling, system.detuning,
                                     gamma_f);
    // Modulation axis: 1 Hz of modulation detuning = 4 pi of two-photon
    // detuning; the analytic FWHM is 2*width (angular) = width/pi Hz here.
    const double analytic_center_hz = center + shift / (2.0 * two_pi);
    const double analytic_fwhm_hz = width / two_pi;

    if (found == nullptr) {
      push(checks, "lineshape-analytic-center", 1.0, 0.1, ts);
      push(checks, "lineshape-analytic-width", 1.0, 0.15, ts);
    } else {
      const double center_err =
          std::abs(found->center_hz - analytic_center_hz) * 2.0 * two_pi;
      push(checks, "lineshape-analytic-center", center_err / width, 0.1, ts);
      const double width_err =
          std::abs(found->fwhm_hz - analytic_fwhm_hz) / analytic_fwhm_hz;
      push(checks, "lineshape-analytic-width", width_err, 0.15, ts);
    }
  }

  // --- dark/bright classification of the lin-lin (m, m) double-Lambda -----
  {
    int mismatches = 0;
    for (int m = -3; m <= 3; ++m) {
      const DoubleLambdaClass parallel = classify_mm_resonance(atom, m, 0.0);
      const DoubleLambdaClass perpendicular =
          classify_mm_resonance(atom, m, constants::pi / 2.0);
      if (std::abs(m) == 3) {
        if (parallel != DoubleLambdaClass::inapplicable) ++mismatches;
        if (perpendicular != DoubleLambdaClass::inapplicable) ++mismatches;
      } else {
        if (parallel != DoubleLambdaClass::mutually_bright) ++mismatches;
        const DoubleLambdaClass expected =
            m == 0 ? DoubleLambdaClass::common_dark
                   : DoubleLambdaClass::neither;
        if (perpendicular != expected) ++mismatches;
      }
    }
    push(checks, "dark-state-classifier", mismatches, 0.5, ts);
  }

  // --- exact m = 0 cancellation of the parallel lin-lin coupling product --
  {
    const CouplingMatrix coupling = build_bichromatic_coupling(
        atom, PolarizationScheme::lin_parallel(),
        FieldAmplitudes::from_intensities(1.0, 1.0));
    const double s0 =
        suppression_check(coupling, index_of(Manifold::ground, 3, 0),
                          index_of(Manifold::ground, 4, 0), 3);
    const double s3 =
        suppression_check(coupling, index_of(Manifold::ground, 3, 3),
                          index_of(Manifold::ground, 4, 3), 3);
    push(checks, "suppression-cancellation", s0 / s3, 1e-12, ts);
  }

  return checks;
}

} // namespace cptsim
