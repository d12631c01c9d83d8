// Acceptance gate: nine end-to-end checks of the simulator against its
// quantitative targets.  Prints one [PASS]/[FAIL] line per criterion and
// exits nonzero if any fails.  Run from anywhere; uses the bundled data file.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cptsim/constants.hpp"
#include "cptsim/coupling.hpp"
#include "cptsim/levels.hpp"
#include "cptsim/lineshape.hpp"
#include "cptsim/observables.hpp"
#include "cptsim/relaxation.hpp"
#include "cptsim/scan.hpp"
#include "cptsim/solver.hpp"
#include "cptsim/validate.hpp"

using namespace cptsim;
using constants::two_pi;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%s] %d %-28s %s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

const RelaxationConfig kCell1{two_pi * 24.5e3, two_pi * 0.38e9, 1.00};
const RelaxationConfig kCell2{two_pi * 107.0, two_pi * 0.51e9, 0.60};
const RelaxationConfig kCell3{two_pi * 81.0, two_pi * 1.69e9, 0.30};

// Modulation-axis resonance center of the (mg, me) ground pair.
double mod_center_hz(const AtomicData& atom, int mg, int me, double b_tesla) {
  const double e3 = breit_rabi_energy(atom.hfs_ground, atom.gj_ground, atom.gi,
                                      atom.nuclear_spin, 3, mg, b_tesla);
  const double e4 = breit_rabi_energy(atom.hfs_ground, atom.gj_ground, atom.gi,
                                      atom.nuclear_spin, 4, me, b_tesla);
  return (e4 - e3 - atom.hfs_ground) / (2.0 * two_pi);
}

double pop_at(const AtomicData& atom, const ScanConfig& config, double x_hz) {
  return excited_population(solve_at(atom, config, x_hz));
}

double window_min(const AtomicData& atom, const ScanConfig& config,
                  double center_hz, double half_span, int points) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double x =
        center_hz - half_span + 2.0 * half_span * i / (points - 1);
    best = std::min(best, pop_at(atom, config, x));
  }
  return best;
}

double predicted_width(const AtomicData& atom, const ScanConfig& config,
                       int mg, int me) {
  for (const PredictedResonance& p : predicted_resonances(atom, config)) {
    if (p.mg == mg && p.me == me) return p.width_hz;
  }
  throw std::runtime_error("no predicted resonance for requested pair");
}

// Depth of the interior minimum below the straight line joining the window
// edges; 0 when the profile is monotone across the window.
double local_dip_amplitude(const AtomicData& atom, const ScanConfig& config,
                           double center_hz, double half_span, int points) {
  std::vector<double> xs(points), ys(points);
  for (int i = 0; i < points; ++i) {
    xs[i] = center_hz - half_span + 2.0 * half_span * i / (points - 1);
    ys[i] = pop_at(atom, config, xs[i]);
  }
  int imin = 0;
  for (int i = 1; i < points; ++i) {
    if (ys[i] < ys[imin]) imin = i;
  }
  if (imin == 0 || imin == points - 1) return 0.0;
  const double t = (xs[imin] - xs.front()) / (xs.back() - xs.front());
  const double line = ys.front() + t * (ys.back() - ys.front());
  return std::max(0.0, line - ys[imin]);
}

// FWHM of the deepest dip in [lo, hi], measured against the edge-joining
// baseline with linear interpolation of the half-depth crossings.
double window_fwhm(const AtomicData& atom, const ScanConfig& config, double lo,
                   double hi, int points) {
  std::vector<double> xs(points), depth(points);
  std::vector<double> ys(points);
  for (int i = 0; i < points; ++i) {
    xs[i] = lo + (hi - lo) * i / (points - 1);
    ys[i] = pop_at(atom, config, xs[i]);
  }
  for (int i = 0; i < points; ++i) {
    const double t = (xs[i] - xs.front()) / (xs.back() - xs.front());
    depth[i] = ys.front() + t * (ys.back() - ys.front()) - ys[i];
  }
  int imin = 0;
  for (int i = 1; i < points; ++i) {
    if (depth[i] > depth[imin]) imin = i;
  }
  if (imin == 0 || imin == points - 1 || depth[imin] <= 0.0) return 0.0;
  const double half = depth[imin] / 2.0;
  double left = xs.front(), right = xs.back();
  for (int i = imin; i > 0; --i) {
    if (depth[i - 1] < half) {
      const double f = (depth[i] - half) / (depth[i] - depth[i - 1]);
      left = xs[i] + f * (xs[i - 1] - xs[i]);
      break;
    }
  }
  for (int i = imin; i < points - 1; ++i) {
    if (depth[i + 1] < half) {
      const double f = (depth[i] - half) / (depth[i] - depth[i + 1]);
      right = xs[i] + f * (xs[i + 1] - xs[i]);
      break;
    }
  }
  return right - left;
}

ScanConfig base_config(const RelaxationConfig& cell, double b_tesla,
                       const PolarizationScheme& scheme, int tuned,
                       double intensity, LinNormalization norm) {
  ScanConfig config;
  config.cell = cell;
  config.b_field = b_tesla;
  config.scheme = scheme;
  config.tuned_f_prime = tuned;
  config.intensity1 = config.intensity2 = intensity;
  config.lin_norm = norm;
  config.workers = 1;
  return config;
}

const ValidationCheck& find_check(const std::vector<ValidationCheck>& checks,
                                  const std::string& name) {
  for (const ValidationCheck& c : checks) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("validation check not found: " + name);
}

// --------------------------------------------------------------- criterion 1
// Cross-scheme amplitude pattern at the shared operating intensity: the four
// resonance amplitudes (sigma-sigma F'=4 reference, sigma-sigma F'=3, and
// the lin-parallel doublets for both tuned levels) reproduce the quoted
// 1.0 : 0.47 : 3.2 : 17 pattern within 15%, in under two minutes.
void criterion_1(const AtomicData& atom) {
  const auto t0 = std::chrono::steady_clock::now();

  struct Entry {
    PolarizationScheme scheme;
    int tuned;
    std::vector<std::pair<int, int>> targets;
  };
  const std::vector<Entry> entries = {
      {PolarizationScheme::sigma_minus(), 4, {{0, 0}}},
      {PolarizationScheme::sigma_minus(), 3, {{0, 0}}},
      {PolarizationScheme::lin_parallel(), 3, {{-1, 1}, {1, -1}}},
      {PolarizationScheme::lin_parallel(), 4, {{-1, 1}, {1, -1}}},
  };

  std::vector<double> amplitude;
  for (const Entry& entry : entries) {
    const ScanConfig config =
        base_config(kCell2, 139e-6, entry.scheme, entry.tuned, 6.6,
                    LinNormalization::full);
    const double far_x = mod_center_hz(atom, 0, 0, config.b_field) + 2.0e4;
    const double baseline = pop_at(atom, config, far_x);
    double best = 0.0;
    for (const auto& [mg, me] : entry.targets) {
      const double width = predicted_width(atom, config, mg, me);
      const double center = mod_center_hz(atom, mg, me, config.b_field);
      const double low = window_min(atom, config, center, width, 41);
      best = std::max(best, baseline - low);
    }
    amplitude.push_back(best);
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const double ref = amplitude[0];
  const double r_ss3 = amplitude[1] / ref;
  const double r_lin3 = amplitude[2] / ref;
  const double r_lin4 = amplitude[3] / ref;
  const bool ok = ref > 0.0 && std::abs(r_ss3 - 0.47) <= 0.15 * 0.47 &&
                  std::abs(r_lin3 - 3.2) <= 0.15 * 3.2 &&
                  std::abs(r_lin4 - 17.0) <= 0.15 * 17.0 && elapsed < 120.0;
  report(1, "amplitude-pattern", ok,
         fmt("ratios 1 : %.3f : %.3f : %.3f (target 1 : 0.47 : 3.2 : 17, "
             "+-15%%); ref amp %.3e; %.1f s (limit 120)",
             r_ss3, r_lin3, r_lin4, ref, elapsed));
}

// --------------------------------------------------------------- criterion 2
// Lin-parallel (m, m) suppression coefficients: exact zero at m = 0 and the
// quoted 0.0065 : 0.021 : 0.027 pattern at |m| = 1..3 within 2% after a
// least-squares common scale.
void criterion_2(const AtomicData& atom) {
  const CouplingMatrix coupling = build_bichromatic_coupling(
      atom, PolarizationScheme::lin_parallel(), FieldAmplitudes{1.0, 1.0},
      {LinNormalization::full});
  double s[4];
  for (int m = 0; m <= 3; ++m) {
    s[m] = suppression_check(coupling, index_of(Manifold::ground, 3, m),
                             index_of(Manifold::ground, 4, m), 3);
  }
  const double target[3] = {0.0065, 0.021, 0.027};
  double num = 0.0, den = 0.0;
  for (int m = 1; m <= 3; ++m) {
    num += target[m - 1] * s[m];
    den += target[m - 1] * target[m - 1];
  }
  const double k = num / den;
  double worst = 0.0;
  for (int m = 1; m <= 3; ++m) {
    worst = std::max(worst,
                     std::abs(k * target[m - 1] - s[m]) / (k * target[m - 1]));
  }
  const bool zero_ok = s[0] <= 1e-12 * s[3];
  const bool ok = zero_ok && worst <= 0.02;
  report(2, "mm-suppression-pattern", ok,
         fmt("m=0: %.1e of m=3 (limit 1e-12); nonzero pattern off by %.2f%% "
             "(limit 2%%)",
             s[0] / s[3], 100.0 * worst));
}

// --------------------------------------------------------------- criterion 3
// Trap-state populations: exact no-light limits 1/16 and 3/16; the
// sigma-minus F'=4 end-state population reaches 0.60 +- 0.05 at the
// operating intensity with a monotone approach; lin-parallel keeps the same
// populations low and flat in the saturated range.
void criterion_3(const AtomicData& atom) {
  const auto sweep = [&](const PolarizationScheme& scheme, int tuned,
                         LinNormalization norm,
                         const std::vector<double>& intensities) {
    const ScanConfig config =
        base_config(kCell2, 139e-6, scheme, tuned, 6.6, norm);
    return trap_population_sweep(atom, config, intensities, 0, 0);
  };

  const double limit4 =
      sweep(PolarizationScheme::sigma_minus(), 4, LinNormalization::split,
            {0.0})[0].trap_population;
  const double limit3 =
      sweep(PolarizationScheme::sigma_minus(), 3, LinNormalization::split,
            {0.0})[0].trap_population;
  const bool limits_ok = std::abs(limit4 - 1.0 / 16.0) <= 1e-6 &&
                         std::abs(limit3 - 3.0 / 16.0) <= 1e-6;

  const auto rise = sweep(PolarizationScheme::sigma_minus(), 4,
                          LinNormalization::split, {3.0, 4.5, 6.6});
  const double v3 = rise[0].trap_population;
  const double v45 = rise[1].trap_population;
  const double v66 = rise[2].trap_population;
  const bool plateau_ok =
      v3 < 0.55 && v66 >= 0.55 && v66 <= 0.65 && v3 < v45 && v45 < v66;

  bool lin_ok = true;
  double lin_spread[2] = {0, 0}, lin_max[2] = {0, 0};
  for (int idx = 0; idx < 2; ++idx) {
    const int tuned = idx == 0 ? 3 : 4;
    const auto flat = sweep(PolarizationScheme::lin_parallel(), tuned,
                            LinNormalization::full, {6.6, 10.0, 15.0});
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (const TrapPoint& p : flat) {
      lo = std::min(lo, p.trap_population);
      hi = std::max(hi, p.trap_population);
      sum += p.trap_population;
    }
    lin_spread[idx] = (hi - lo) / (sum / flat.size());
    lin_max[idx] = hi;
    lin_ok = lin_ok && lin_spread[idx] <= 0.10 && hi < 0.20;
  }

  report(3, "trap-populations", limits_ok && plateau_ok && lin_ok,
         fmt("I=0: %.7f, %.7f (1/16, 3/16 +-1e-6); rise %.3f < %.3f < %.3f "
             "with end in [0.55, 0.65]; lin spreads %.1f%%/%.1f%% (limit "
             "10%%), max %.3f/%.3f (limit 0.20)",
             limit4, limit3, v3, v45, v66, 100.0 * lin_spread[0],
             100.0 * lin_spread[1], lin_max[0], lin_max[1]));
}

// --------------------------------------------------------------- criterion 4
// Resonance width vs intensity: the zero-intensity extrapolation returns the
// ground relaxation rate within 10%, broadening is monotone, and the
// cross-scheme width ordering holds at the operating intensity.
void criterion_4(const AtomicData& atom) {
  const ScanConfig ss4 =
      base_config(kCell2, 139e-6, PolarizationScheme::sigma_minus(), 4, 6.6,
                  LinNormalization::split);
  const auto pts = intensity_sweep(
      atom, ss4, {0.05, 0.1, 0.2, 0.25, 1.0, 3.0, 6.6}, 0, 0);

  // linear least squares over the three lowest intensities
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 3; ++i) {
    sx += pts[i].intensity_w_m2;
    sy += pts[i].width_hz;
    sxx += pts[i].intensity_w_m2 * pts[i].intensity_w_m2;
    sxy += pts[i].intensity_w_m2 * pts[i].width_hz;
  }
  const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / 3.0;
  const double gamma_p_hz = kCell2.gamma_p / two_pi;
  const bool intercept_ok =
      std::abs(intercept - gamma_p_hz) <= 0.10 * gamma_p_hz;

  const bool monotone_ok =
      pts[3].width_hz > 0 && pts[4].width_hz > pts[3].width_hz &&
      pts[5].width_hz > pts[4].width_hz && pts[6].width_hz > pts[5].width_hz;

  // cross-scheme ordering at I = 6.6; the lin-parallel doublet members merge
  // at this intensity, so their width is measured on the joint feature
  const ScanConfig ss3 =
      base_config(kCell2, 139e-6, PolarizationScheme::sigma_minus(), 3, 6.6,
                  LinNormalization::split);
  const double w_ss4 = pts[6].width_hz;
  const double w_ss3 = intensity_sweep(atom, ss3, {6.6}, 0, 0)[0].width_hz;
  double w_lin[2] = {0, 0};
  for (int idx = 0; idx < 2; ++idx) {
    const int tuned = idx == 0 ? 3 : 4;
    const ScanConfig lin =
        base_config(kCell2, 139e-6, PolarizationScheme::lin_parallel(), tuned,
                    6.6, LinNormalization::full);
    const double w_pred = predicted_width(atom, lin, -1, 1);
    const double lo = mod_center_hz(atom, -1, 1, lin.b_field) - 2.5 * w_pred;
    const double hi = mod_center_hz(atom, 1, -1, lin.b_field) + 2.5 * w_pred;
    w_lin[idx] = window_fwhm(atom, lin, lo, hi, 101);
  }
  const bool order_ok =
      w_lin[1] > w_lin[0] && w_lin[0] > w_ss4 && w_ss4 > w_ss3 && w_ss3 > 0;

  report(4, "width-vs-intensity", intercept_ok && monotone_ok && order_ok,
         fmt("I->0 intercept %.1f Hz (target %.0f +-10%%); monotone "
             "%.0f/%.0f/%.0f/%.0f; ordering linF4 %.0f > linF3 %.0f > ssF4 "
             "%.0f > ssF3 %.0f Hz",
             intercept, gamma_p_hz, pts[3].width_hz, pts[4].width_hz,
             pts[5].width_hz, pts[6].width_hz, w_lin[1], w_lin[0], w_ss4,
             w_ss3));
}

// --------------------------------------------------------------- criterion 5
// Relaxation-ratio signatures in the 7-peak sigma-minus pattern at low
// field: uniform redistribution (r = 1) flattens the low-m core with no
// end-resonance dominance; r = 0.3 makes the (-3,-3) peak dominant; the
// dominance measure increases monotonically as r drops.
void criterion_5(const AtomicData& atom) {
  static const double offsets[] = {0,     40,   -40,   75,    -75,   150,
                                   -150,  250,  -250,  400,   -400,  700,
                                   -700,  1200, -1200, 2400,  -2400, 4800,
                                   -4800, 9600, -9600, 19200, -19200};
  const double b = 22.7e-6;

  double centers[7];
  for (int m = -3; m <= 3; ++m) centers[m + 3] = mod_center_hz(atom, m, m, b);
  const double spacing = (centers[6] - centers[0]) / 6.0;
  const double base_x = centers[6] + spacing / 2.0;

  const RelaxationConfig cells[3] = {kCell1, kCell2, kCell3};
  double amp[3][7];
  for (int c = 0; c < 3; ++c) {
    const ScanConfig config =
        base_config(cells[c], b, PolarizationScheme::sigma_minus(), 4, 6.6,
                    LinNormalization::split);
    const double baseline = pop_at(atom, config, base_x);
    for (int p = 0; p < 7; ++p) {
      double low = std::numeric_limits<double>::infinity();
      for (double off : offsets) {
        low = std::min(low, pop_at(atom, config, centers[p] + off));
      }
      amp[c][p] = std::max(0.0, baseline - low);
    }
  }

  const auto dominance = [&](int c) {
    double rest = 0.0;
    for (int p = 1; p < 7; ++p) rest += amp[c][p];
    return amp[c][0] / (rest / 6.0);
  };

  // (a) r = 1.00: no end dominance, near-uniform m = -3..0 core
  double core_min = std::numeric_limits<double>::infinity(), core_max = 0.0;
  for (int p = 0; p <= 3; ++p) {
    core_min = std::min(core_min, amp[0][p]);
    core_max = std::max(core_max, amp[0][p]);
  }
  const bool a_ok = amp[0][0] < amp[0][1] && core_min / core_max >= 0.60;

  // (b) r = 0.30: (-3,-3) strictly dominant by at least 1.5x
  bool b_ok = true;
  for (int p = 1; p < 7; ++p) b_ok = b_ok && amp[2][0] >= 1.5 * amp[2][p];

  // (c) dominance increases as r drops
  const double d1 = dominance(0), d2 = dominance(1), d3 = dominance(2);
  const bool c_ok = d1 < d2 && d2 < d3;

  report(5, "relaxation-ratio-patterns", a_ok && b_ok && c_ok,
         fmt("r=1: amp(-3)/amp(-2) %.2f (<1), core min/max %.2f (>=0.60); "
             "r=0.3: amp(-3) >= 1.5x others %s; dominance %.2f < %.2f < %.2f",
             amp[0][0] / amp[0][1], core_min / core_max, b_ok ? "yes" : "no",
             d1, d2, d3));
}

// ------------------------------------------------------------ criteria 6 + 7
// 6: solver cross-checks — steady state matches long time evolution on
//    randomized configurations, the hand-solved three-level system, and the
//    two routes to the excited population.
// 7: structural invariants — trace, hermiticity, branching normalization,
//    and source-flux balance.
void report_validation_subset(int index, const std::string& name,
                              const std::vector<ValidationCheck>& checks,
                              const std::vector<const char*>& wanted) {
  bool ok = true;
  std::string detail;
  for (const char* check_name : wanted) {
    const ValidationCheck& c = find_check(checks, check_name);
    ok = ok && c.passed;
    detail += fmt("%s %.1e<=%.0e; ", check_name, c.residual, c.bound);
  }
  report(index, name, ok, detail);
}

// --------------------------------------------------------------- criterion 8
// Closed-form lineshape vs the full solver on an isolated weak resonance
// (center within a tenth of the width, FWHM within 15%), plus the asymmetry
// signature: the dip centroid shift and third moment flip sign when the
// optical-detuning offset flips sign.
void criterion_8(const AtomicData& atom,
                 const std::vector<ValidationCheck>& checks) {
  const ValidationCheck& center = find_check(checks, "lineshape-analytic-center");
  const ValidationCheck& width = find_check(checks, "lineshape-analytic-width");

  double centroid[2] = {0, 0}, skew[2] = {0, 0};
  for (int idx = 0; idx < 2; ++idx) {
    const double sign = idx == 0 ? 1.0 : -1.0;
    ScanConfig config =
        base_config(kCell2, 285e-6, PolarizationScheme::lin_parallel(), 3, 0.4,
                    LinNormalization::split);
    config.delta_opt_offset = sign * two_pi * 3.0e8;
    const double x_pred = mod_center_hz(atom, -1, 1, config.b_field);

    const int n = 31;
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = x_pred - 300.0 + 600.0 * i / (n - 1);
      ys[i] = pop_at(atom, config, xs[i]);
    }
    double wsum = 0.0, wx = 0.0;
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1);
      const double line = ys.front() + t * (ys.back() - ys.front());
      w[i] = std::max(0.0, line - ys[i]);
      wsum += w[i];
      wx += w[i] * xs[i];
    }
    const double mean = wx / wsum;
    // Raman-axis figures: 1 Hz of modulation detuning = 2 Hz of two-photon
    // detuning
    centroid[idx] = 2.0 * (mean - x_pred);
    for (int i = 0; i < n; ++i) {
      skew[idx] += w[i] * std::pow(2.0 * (xs[i] - mean), 3);
    }
    skew[idx] /= wsum;
  }
  const bool flip_ok = centroid[0] > 0 && skew[0] > 0 && centroid[1] < 0 &&
                       skew[1] < 0;

  report(8, "lineshape-asymmetry", center.passed && width.passed && flip_ok,
         fmt("analytic center %.3f (limit %.1f widths), width %.3f (limit "
             "%.2f); offset +: centroid %+.1f Hz skew %+.1e; offset -: "
             "centroid %+.1f Hz skew %+.1e (signs must flip)",
             center.residual, center.bound, width.residual, width.bound,
             centroid[0], skew[0], centroid[1], skew[1]));
}

// --------------------------------------------------------------- criterion 9
// Dark-state logic of the lin-lin (m, m) resonances at high field: the
// perpendicular clock resonance is present and dominant, the parallel clock
// resonance is suppressed below 1% of its doublet reference, and the
// presence/absence of every (m, m) resonance agrees with the double-Lambda
// classifier combined with the coupling-product suppression measure.
void criterion_9(const AtomicData& atom) {
  const double b = 285e-6;
  const double half_span = 350.0;
  const int n = 29;

  const ScanConfig par =
      base_config(kCell2, b, PolarizationScheme::lin_parallel(), 3, 1.2,
                  LinNormalization::full);
  const ScanConfig perp =
      base_config(kCell2, b, PolarizationScheme::lin_perpendicular(), 4, 1.2,
                  LinNormalization::full);

  double amp_par[7], amp_perp[7];
  for (int m = -3; m <= 3; ++m) {
    const double center = mod_center_hz(atom, m, m, b);
    amp_par[m + 3] = local_dip_amplitude(atom, par, center, half_span, n);
    amp_perp[m + 3] = local_dip_amplitude(atom, perp, center, half_span, n);
  }
  const double ref_par = local_dip_amplitude(
      atom, par, mod_center_hz(atom, -1, 1, b), half_span, n);
  const double ref_perp = amp_perp[3];

  const CouplingMatrix coupling = build_bichromatic_coupling(
      atom, PolarizationScheme::lin_parallel(),
      FieldAmplitudes::from_intensities(1.2, 1.2), {LinNormalization::full});
  double s[7];
  for (int m = -3; m <= 3; ++m) {
    s[m + 3] = suppression_check(coupling, index_of(Manifold::ground, 3, m),
                                 index_of(Manifold::ground, 4, m), 3);
  }
  const double s3 = std::max(s[0], s[6]);

  bool classes_ok = true, agree_ok = true;
  for (int m = -3; m <= 3; ++m) {
    const DoubleLambdaClass cls_par = classify_mm_resonance(atom, m, 0.0);
    const DoubleLambdaClass cls_perp =
        classify_mm_resonance(atom, m, constants::pi / 2.0);
    const DoubleLambdaClass want_par = std::abs(m) == 3
                                           ? DoubleLambdaClass::inapplicable
                                           : DoubleLambdaClass::mutually_bright;
    const DoubleLambdaClass want_perp =
        std::abs(m) == 3 ? DoubleLambdaClass::inapplicable
        : m == 0         ? DoubleLambdaClass::common_dark
                         : DoubleLambdaClass::neither;
    classes_ok = classes_ok && cls_par == want_par && cls_perp == want_perp;

    // predicted-absent: mutually-bright branches with a vanishing shared
    // coupling product; observed-absent: below 5% of the scheme reference
    const bool pred_absent_par =
        cls_par == DoubleLambdaClass::mutually_bright && s[m + 3] <= 1e-10 * s3;
    const bool obs_absent_par = amp_par[m + 3] < 0.05 * ref_par;
    const bool pred_absent_perp =
        cls_perp == DoubleLambdaClass::mutually_bright &&
        s[m + 3] <= 1e-10 * s3;
    const bool obs_absent_perp = amp_perp[m + 3] < 0.05 * ref_perp;
    agree_ok = agree_ok && pred_absent_par == obs_absent_par &&
               pred_absent_perp == obs_absent_perp;
  }

  const bool par_clock_ok = ref_par > 0 && amp_par[3] < 0.01 * ref_par;
  bool perp_clock_ok = ref_perp > 0;
  for (int p = 0; p < 7; ++p) {
    if (p != 3) perp_clock_ok = perp_clock_ok && amp_perp[3] > amp_perp[p];
  }
  const bool trend_ok = amp_par[4] > amp_par[3] && amp_par[5] > amp_par[4] &&
                        amp_par[6] > amp_par[5] && amp_par[2] > amp_par[3] &&
                        amp_par[1] > amp_par[2] && amp_par[0] > amp_par[1];

  report(9, "dark-state-selection", classes_ok && agree_ok && par_clock_ok &&
                                        perp_clock_ok && trend_ok,
         fmt("classes %s; presence/absence agreement %s; parallel (0,0) "
             "%.2f%% of doublet (limit 1%%); perpendicular (0,0) largest %s; "
             "parallel growth with |m| %s",
             classes_ok ? "match" : "MISMATCH", agree_ok ? "yes" : "NO",
             ref_par > 0 ? 100.0 * amp_par[3] / ref_par : -1.0,
             perp_clock_ok ? "yes" : "NO", trend_ok ? "yes" : "NO"));
}

} // namespace

int main() {
  const AtomicData atom = load_atomic_data(default_data_file());

  const auto guarded = [](int index, const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(index, name, false, std::string("exception: ") + e.what());
    }
  };

  guarded(1, "amplitude-pattern", [&] { criterion_1(atom); });
  guarded(2, "mm-suppression-pattern", [&] { criterion_2(atom); });
  guarded(3, "trap-populations", [&] { criterion_3(atom); });
  guarded(4, "width-vs-intensity", [&] { criterion_4(atom); });
  guarded(5, "relaxation-ratio-patterns", [&] { criterion_5(atom); });

  std::vector<ValidationCheck> checks;
  try {
    checks = run_validation(atom, {});
  } catch (const std::exception& e) {
    report(6, "solver-cross-checks", false,
           std::string("validation threw: ") + e.what());
    report(7, "structural-invariants", false, "validation threw");
    report(8, "lineshape-asymmetry", false, "validation threw");
    report(9, "dark-state-selection", false, "not reached");
    return 1;
  }
  guarded(6, "solver-cross-checks", [&] {
    report_validation_subset(6, "solver-cross-checks", checks,
                             {"steady-vs-time-evolution",
                              "three-level-lambda-oracle",
                              "excited-population-identity"});
  });
  guarded(7, "structural-invariants", [&] {
    report_validation_subset(7, "structural-invariants", checks,
                             {"trace-preservation", "hermiticity",
                              "branching-normalization",
                              "source-flux-balance"});
  });
  guarded(8, "lineshape-asymmetry", [&] { criterion_8(atom, checks); });
  guarded(9, "dark-state-selection", [&] { criterion_9(atom); });

  std::printf("%s: %d/9 criteria passed\n", g_failures == 0 ? "OK" : "FAILED",
              9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
