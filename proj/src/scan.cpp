#include "cptsim/scan.hpp"

#include "cptsim/constants.hpp"
#include "cptsim/lineshape.hpp"
#include "cptsim/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace cptsim {

namespace {

using constants::two_pi;

// Raman detuning (angular) for a modulation-axis detuning in Hz: both
// sidebands move apart, so the Raman detuning is twice the modulation one.
inline double raman_from_modulation_hz(double x_hz) {
  return 2.0 * two_pi * x_hz;
}

void check_scan_config(const ScanConfig& config) {
  if (config.tuned_f_prime != 3 && config.tuned_f_prime != 4) {
    throw std::invalid_argument("scan: tuned level must be 3 or 4");
  }
  if (config.intensity1 < 0 || config.intensity2 < 0) {
    throw std::invalid_argument("scan: intensities must be >= 0");
  }
}

// Everything that does not change across scan points.
struct ScanContext {
  Eigen::VectorXd omega_b;
  Eigen::MatrixXcd coupling;
  Eigen::VectorXd decay;
  Eigen::MatrixXd source;
  double delta_opt = 0.0;
  double gamma_f = 0.0; // optical-coherence decay rate (gamma_p + Gamma)/2
};

ScanContext make_context(const AtomicData& atom, const ScanConfig& config) {
  check_scan_config(config);
  ScanContext ctx;
  ctx.omega_b = zeeman_energies(atom, config.b_field);
  const FieldAmplitudes fields = FieldAmplitudes::from_intensities(
      config.intensity1, config.intensity2, config.intensities_are_total);
  CouplingOptions opts;
  opts.lin_norm = config.lin_norm;
  ctx.coupling =
      build_bichromatic_coupling(atom, config.scheme, fields, opts).omega;
  ctx.decay = decay_vector(config.cell);
  ctx.source = source_coefficients(config.cell, build_branching(atom));
  ctx.delta_opt = delta_opt_for_tuned_level(atom, config.tuned_f_prime,
                                            config.delta_opt_offset);
  ctx.gamma_f = 0.5 * (config.cell.gamma_p + config.cell.big_gamma);
  return ctx;
}

LevelSystem system_at(const AtomicData& atom, const ScanContext& ctx,
                      double detuning_hz) {
  LevelSystem system;
  system.decay = ctx.decay;
  system.detuning = detuning_vector(
      atom, ctx.omega_b, raman_from_modulation_hz(detuning_hz), ctx.delta_opt);
  system.coupling = ctx.coupling;
  system.source = ctx.source;
  return system;
}

double evaluate_observable(const Eigen::MatrixXcd& rho,
                           const LevelSystem& system,
                           const ScanConfig& config) {
  if (config.observable == ObservableKind::excited_population) {
    return excited_population(rho);
  }
  return transmittance(rho, system, config.alpha).transmittance;
}

// Solves every grid point with a fixed worker pool.  Points are handed out
// through an atomic counter; results land in their own slots, so the output
// is independent of scheduling.
std::vector<double> solve_grid(const AtomicData& atom, const ScanContext& ctx,
                               const ScanConfig& config,
                               const std::vector<double>& grid_hz) {
  const int n = static_cast<int>(grid_hz.size());
  std::vector<double> values(grid_hz.size(), 0.0);
  int workers = config.workers > 0
                    ? config.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto work = [&]() {
    SteadyStateSolver solver;
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      try {
        const LevelSystem system = system_at(atom, ctx, grid_hz[i]);
        const Liouvillian liouvillian = assemble(system);
        const Eigen::MatrixXcd rho = solver.solve(liouvillian, config.solver);
        values[static_cast<size_t>(i)] = evaluate_observable(rho, system, config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n); // stop handing out points
        break;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return values;
}

// Orientation: resonances are dips in excited population and peaks in
// transmittance; work internally with "peak up" values.
inline double orientation(ObservableKind kind) {
  return kind == ObservableKind::excited_population ? -1.0 : 1.0;
}

std::vector<double> oriented_values(const std::vector<double>& values,
                                    ObservableKind kind) {
  std::vector<double> out = values;
  const double s = orientation(kind);
  for (double& v : out) v *= s;
  return out;
}

// Local maxima with a prominence filter: candidate peaks rise at least
// `min_prominence` above the higher of the two valleys separating them from
// the nearest higher samples.
std::vector<int> detect_peak_indices(const std::vector<double>& y,
                                     double min_prominence) {
  const int n = static_cast<int>(y.size());
  std::vector<int> peaks;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // plateau handling: skip to the right edge of equal values
    int j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 < n && y[j + 1] > y[i]) continue;
    double left_min = y[i];
    for (int k = i - 1; k >= 0; --k) {
      left_min = std::min(left_min, y[k]);
      if (y[k] > y[i]) break;
    }
    double right_min = y[i];
    for (int k = j + 1; k < n; ++k) {
      right_min = std::min(right_min, y[k]);
      if (y[k] > y[i]) break;
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence >= min_prominence) peaks.push_back(i);
  }
  return peaks;
}

void insert_sorted_point(std::vector<double>& xs, std::vector<double>& ys,
                         double x, double y) {
  const auto it = std::lower_bound(xs.begin(), xs.end(), x);
  if (it != xs.end() && *it == x) return;
  const auto pos = it - xs.begin();
  xs.insert(it, x);
  ys.insert(ys.begin() + pos, y);
}

} // namespace

std::vector<PredictedResonance> predicted_resonances(const AtomicData& atom,
                                                     const ScanConfig& config) {
  check_scan_config(config);
  const ScanContext ctx = make_context(atom, config);
  std::vector<std::pair<int, int>> pairs;
  const bool lin = config.scheme.kind == SchemeKind::lin_lin;
  for (int mg = -3; mg <= 3; ++mg) {
    pairs.emplace_back(mg, mg);
    if (lin) {
      if (mg + 2 <= 4) pairs.emplace_back(mg, mg + 2);
      if (mg - 2 >= -4) pairs.emplace_back(mg, mg - 2);
    }
  }

  std::vector<PredictedResonance> out;
  for (const auto& [mg, me] : pairs) {
    PredictedResonance p;
    p.mg = mg;
    p.me = me;
    const int g = index_of(Manifold::ground, 3, mg);
    const int e = index_of(Manifold::ground, 4, me);
    // delta_g = delta_e at Raman detuning (w_e - w_e0) - (w_g - w_g0).
    const double raman = (ctx.omega_b[e - 1] - atom.omega_e0()) -
                         (ctx.omega_b[g - 1] - atom.omega_g0());
    p.center_hz = raman / (2.0 * two_pi);
    const Eigen::VectorXd detuning =
        detuning_vector(atom, ctx.omega_b, raman, ctx.delta_opt);
    p.width_hz = lineshape_width({g, e}, ctx.coupling, detuning,
                                 config.cell.gamma_p, ctx.gamma_f) /
                 two_pi;
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(),
            [](const PredictedResonance& a, const PredictedResonance& b) {
              return a.center_hz < b.center_hz;
            });
  return out;
}

void label_peaks(std::vector<Peak>& peaks,
                 const std::vector<PredictedResonance>& predictions) {
  if (predictions.empty()) return;
  double spacing = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < predictions.size(); ++i) {
    spacing = std::min(spacing, predictions[i].center_hz -
                                    predictions[i - 1].center_hz);
  }
  for (Peak& peak : peaks) {
    const PredictedResonance* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& p : predictions) {
      const double d = std::abs(peak.center_hz - p.center_hz);
      if (d < best_d) {
        best_d = d;
        best = &p;
      }
    }
    if (best && best_d <= spacing / 3.0) {
      peak.labeled = true;
      peak.mg = best->mg;
      peak.me = best->me;
    } else {
      peak.labeled = false;
    }
  }
}

std::optional<double> measure_fwhm(const SpectrumScan& scan, Peak& peak) {
  const std::vector<double>& xs = scan.detuning_hz;
  if (xs.size() < 5) return std::nullopt;
  const std::vector<double> y = oriented_values(scan.value, scan.observable);
  // Sample index of the peak.
  int ip = 0;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < xs.size(); ++i) {
    const double d = std::abs(xs[i] - peak.center_hz);
    if (d < best) {
      best = d;
      ip = static_cast<int>(i);
    }
  }
  const double b = spectrum_baseline(y);
  const double yp = y[static_cast<size_t>(ip)];
  if (!(yp > b)) return std::nullopt;
  const double half = b + 0.5 * (yp - b);

  double left = std::numeric_limits<double>::quiet_NaN();
  for (int k = ip - 1; k >= 0; --k) {
    if (y[k] > yp) return std::nullopt; // merged with a larger neighbor
    if (y[k] <= half) {
      const double f = (half - y[k]) / (y[k + 1] - y[k]);
      left = xs[k] + f * (xs[k + 1] - xs[k]);
      break;
    }
  }
  double right = std::numeric_limits<double>::quiet_NaN();
  for (int k = ip + 1; k < static_cast<int>(xs.size()); ++k) {
    if (y[k] > yp) return std::nullopt;
    if (y[k] <= half) {
      const double f = (half - y[k]) / (y[k - 1] - y[k]);
      right = xs[k] - f * (xs[k] - xs[k - 1]);
      break;
    }
  }
  if (!std::isfinite(left) || !std::isfinite(right)) return std::nullopt;
  const double fwhm = right - left;

  for (const Peak& other : scan.peaks) {
    if (&other == &peak) continue;
    const double d = std::abs(other.center_hz - peak.center_hz);
    if (d > 0 && d < 3.0 * fwhm) {
      peak.overlapped = true;
      return std::nullopt;
    }
  }
  peak.fwhm_hz = fwhm;
  return fwhm;
}

SpectrumScan run_scan(const AtomicData& atom, const ScanConfig& config) {
  check_scan_config(config);
  if (!(config.scan_max_hz > config.scan_min_hz)) {
    throw std::invalid_argument("scan: empty detuning range");
  }
  if (config.points < 3) {
    throw std::invalid_argument("scan: need at least 3 grid points");
  }
  const ScanContext ctx = make_context(atom, config);

  // Base grid plus prediction-guided refinement windows.
  std::set<double> grid;
  const double span = config.scan_max_hz - config.scan_min_hz;
  for (int i = 0; i < config.points; ++i) {
    grid.insert(config.scan_min_hz +
                span * static_cast<double>(i) / (config.points - 1));
  }
  std::vector<PredictedResonance> predictions =
      predicted_resonances(atom, config);
  if (config.refine) {
    const double base_step = span / (config.points - 1);
    for (const auto& p : predictions) {
      if (p.center_hz < config.scan_min_hz - 2 * p.width_hz ||
          p.center_hz > config.scan_max_hz + 2 * p.width_hz) {
        continue;
      }
      const double w = std::max(p.width_hz, 1e-12);
      if (4.0 * w > 2.0 * base_step) continue; // base grid already resolves it
      const int fine_points = 25;
      for (int i = 0; i < fine_points; ++i) {
        const double x = p.center_hz +
                         4.0 * w * (2.0 * i / (fine_points - 1.0) - 1.0);
        if (x >= config.scan_min_hz && x <= config.scan_max_hz) grid.insert(x);
      }
    }
  }

  SpectrumScan scan;
  scan.observable = config.observable;
  scan.detuning_hz.assign(grid.begin(), grid.end());
  scan.value = solve_grid(atom, ctx, config, scan.detuning_hz);

  // Peak detection on the oriented signal.
  auto detect = [&](double min_prominence) {
    return detect_peak_indices(
        oriented_values(scan.value, config.observable), min_prominence);
  };
  std::vector<double> y = oriented_values(scan.value, config.observable);
  const double range =
      *std::max_element(y.begin(), y.end()) -
      *std::min_element(y.begin(), y.end());
  const double min_prominence = 0.02 * range;
  std::vector<int> peak_idx = detect(min_prominence);

  // Midpoint bisection around each detected extremum sharpens the center.
  if (config.refine && range > 0) {
    SteadyStateSolver solver;
    for (int level = 0; level < 3; ++level) {
      std::vector<double> new_x;
      for (int ip : peak_idx) {
        if (ip > 0) {
          new_x.push_back(0.5 * (scan.detuning_hz[ip - 1] + scan.detuning_hz[ip]));
        }
        if (ip + 1 < static_cast<int>(scan.detuning_hz.size())) {
          new_x.push_back(0.5 * (scan.detuning_hz[ip] + scan.detuning_hz[ip + 1]));
        }
      }
      std::sort(new_x.begin(), new_x.end());
      new_x.erase(std::unique(new_x.begin(), new_x.end()), new_x.end());
      for (double x : new_x) {
        if (std::binary_search(scan.detuning_hz.begin(), scan.detuning_hz.end(),
                               x)) {
          continue;
        }
        const LevelSystem system = system_at(atom, ctx, x);
        const Eigen::MatrixXcd rho = solver.solve(assemble(system), config.solver);
        insert_sorted_point(scan.detuning_hz, scan.value, x,
                            evaluate_observable(rho, system, config));
      }
      peak_idx = detect(min_prominence);
    }
  }

  // Build, label, and measure the peak list.
  y = oriented_values(scan.value, config.observable);
  const double baseline = spectrum_baseline(y);
  for (int ip : peak_idx) {
    Peak peak;
    peak.center_hz = scan.detuning_hz[ip];
    peak.amplitude = std::abs(y[ip] - baseline);
    scan.peaks.push_back(peak);
  }
  label_peaks(scan.peaks, predictions);
  for (Peak& peak : scan.peaks) measure_fwhm(scan, peak);
  return scan;
}

Eigen::MatrixXcd solve_at(const AtomicData& atom, const ScanConfig& config,
                          double detuning_hz) {
  const ScanContext ctx = make_context(atom, config);
  const LevelSystem system = system_at(atom, ctx, detuning_hz);
  return steady_state(assemble(system), config.solver);
}

namespace {

const PredictedResonance* find_prediction(
    const std::vector<PredictedResonance>& predictions, int mg, int me) {
  for (const auto& p : predictions) {
    if (p.mg == mg && p.me == me) return &p;
  }
  return nullptr;
}

const Peak* find_labeled_peak(const SpectrumScan& scan, int mg, int me) {
  const Peak* best = nullptr;
  for (const Peak& peak : scan.peaks) {
    if (peak.labeled && peak.mg == mg && peak.me == me &&
        (!best || peak.amplitude > best->amplitude)) {
      best = &peak;
    }
  }
  return best;
}

} // namespace

std::vector<IntensityPoint> intensity_sweep(const AtomicData& atom,
                                            ScanConfig config,
                                            const std::vector<double>& intensities,
                                            int mg, int me) {
  std::vector<IntensityPoint> out;
  for (double intensity : intensities) {
    IntensityPoint point;
    point.intensity_w_m2 = intensity;
    if (intensity <= 0) {
      out.push_back(point); // no light: no resonance, zero width/amplitude
      continue;
    }
    config.intensity1 = intensity;
    config.intensity2 = intensity;
    const auto predictions = predicted_resonances(atom, config);
    const PredictedResonance* p = find_prediction(predictions, mg, me);
    if (!p) {
      throw std::invalid_argument("intensity_sweep: no predicted resonance for the requested (mg, me)");
    }
    const double w = std::max(p->width_hz, 1e-3);
    config.scan_min_hz = p->center_hz - 8.0 * w;
    config.scan_max_hz = p->center_hz + 8.0 * w;
    config.points = 121;
    config.refine = true;
    const SpectrumScan scan = run_scan(atom, config);
    const Peak* best = find_labeled_peak(scan, mg, me);
    if (best) {
      point.width_hz = best->fwhm_hz;
      point.amplitude = best->amplitude;
      // The analytic width estimate that sized the window can exceed the
      // true dip width severalfold at high intensity, leaving too few
      // samples per width.  Re-measure on a window sized by the measured
      // width so the grid resolution tracks the actual feature.
      if (best->fwhm_hz > 0) {
        ScanConfig fine = config;
        const double wf = std::max(best->fwhm_hz, 1e-3);
        fine.scan_min_hz = best->center_hz - 4.0 * wf;
        fine.scan_max_hz = best->center_hz + 4.0 * wf;
        const SpectrumScan rescan = run_scan(atom, fine);
        if (const Peak* refined = find_labeled_peak(rescan, mg, me);
            refined && refined->fwhm_hz > 0) {
          point.width_hz = refined->fwhm_hz;
          point.amplitude = refined->amplitude;
        }
      }
    }
    out.push_back(point);
  }
  return out;
}

std::vector<TrapPoint> trap_population_sweep(const AtomicData& atom,
                                             ScanConfig config,
                                             const std::vector<double>& intensities,
                                             int mg, int me) {
  // Trap states are defined by the circular scheme with the same tuned
  // level: sublevels with no optical coupling into that manifold.  For the
  // lin-lin schemes (which have no fully dark sublevel) the same set is
  // tracked so curves are comparable across schemes.
  const PolarizationScheme circular =
      config.scheme.kind == SchemeKind::sigma_plus_pair
          ? PolarizationScheme::sigma_plus()
          : PolarizationScheme::sigma_minus();
  const CouplingMatrix structure = build_bichromatic_coupling(
      atom, circular, FieldAmplitudes{1.0, 1.0}, CouplingOptions{});
  const std::vector<int> trap_levels =
      dark_ground_states(structure, config.tuned_f_prime);

  std::vector<TrapPoint> out;
  for (double intensity : intensities) {
    TrapPoint point;
    point.intensity_w_m2 = intensity;
    config.intensity1 = intensity;
    config.intensity2 = intensity;
    const auto predictions = predicted_resonances(atom, config);
    const PredictedResonance* p = find_prediction(predictions, mg, me);
    if (!p) {
      throw std::invalid_argument("trap_population_sweep: no predicted resonance for the requested (mg, me)");
    }
    const ScanContext ctx = make_context(atom, config);
    SteadyStateSolver solver;

    // Locate the resonance: minimize the excited population over a
    // shrinking bracket around the predicted center.
    double center = p->center_hz;
    Eigen::MatrixXcd rho_at_min;
    if (intensity <= 0) {
      const LevelSystem system = system_at(atom, ctx, center);
      rho_at_min = solver.solve(assemble(system), config.solver);
    } else {
      double half_span = std::max(4.0 * p->width_hz, 1.0);
      double best_x = center;
      double best_val = std::numeric_limits<double>::infinity();
      for (int level = 0; level < 4; ++level) {
        for (int i = 0; i < 9; ++i) {
          const double x = center + half_span * (2.0 * i / 8.0 - 1.0);
          const LevelSystem system = system_at(atom, ctx, x);
          const Eigen::MatrixXcd rho = solver.solve(assemble(system), config.solver);
          const double val = excited_population(rho);
          if (val < best_val) {
            best_val = val;
            best_x = x;
            rho_at_min = rho;
          }
        }
        center = best_x;
        half_span /= 4.0;
      }
    }
    for (int level : trap_levels) {
      point.trap_population += rho_at_min(level - 1, level - 1).real();
    }
    out.push_back(point);
  }
  return out;
}

RFitResult fit_relaxation_ratio(const AtomicData& atom, ScanConfig config,
                                const std::vector<double>& reference_detuning_hz,
                                const std::vector<double>& reference_value,
                                const std::vector<double>& r_grid) {
  if (reference_detuning_hz.size() != reference_value.size() ||
      reference_detuning_hz.size() < 5) {
    throw std::invalid_argument("fit_relaxation_ratio: reference spectrum too short");
  }
  if (r_grid.empty()) {
    throw std::invalid_argument("fit_relaxation_ratio: empty r grid");
  }

  // Extract labeled peak amplitudes from the reference trace.
  SpectrumScan reference;
  reference.detuning_hz = reference_detuning_hz;
  reference.value = reference_value;
  reference.observable = config.observable;
  {
    const std::vector<double> y =
        oriented_values(reference.value, reference.observable);
    const double range = *std::max_element(y.begin(), y.end()) -
                         *std::min_element(y.begin(), y.end());
    const double baseline = spectrum_baseline(y);
    for (int ip : detect_peak_indices(y, 0.02 * range)) {
      Peak peak;
      peak.center_hz = reference.detuning_hz[ip];
      peak.amplitude = std::abs(y[ip] - baseline);
      reference.peaks.push_back(peak);
    }
  }
  const auto predictions = predicted_resonances(atom, config);
  label_peaks(reference.peaks, predictions);

  std::map<std::pair<int, int>, double> ref_amps;
  for (const Peak& peak : reference.peaks) {
    if (peak.labeled) ref_amps[{peak.mg, peak.me}] = peak.amplitude;
  }
  if (ref_amps.size() < 3) {
    throw std::runtime_error(
        "fit_relaxation_ratio: fewer than 3 reference peaks match predicted resonances");
  }
  double ref_max = 0.0;
  for (const auto& [label, amp] : ref_amps) ref_max = std::max(ref_max, amp);

  // Scan window covering the reference trace.
  config.scan_min_hz = reference_detuning_hz.front();
  config.scan_max_hz = reference_detuning_hz.back();

  RFitResult result;
  result.matched_peaks = static_cast<int>(ref_amps.size());
  double best_misfit = std::numeric_limits<double>::infinity();
  for (double r : r_grid) {
    ScanConfig trial = config;
    trial.cell.r = r;
    const SpectrumScan scan = run_scan(atom, trial);
    std::map<std::pair<int, int>, double> amps;
    for (const Peak& peak : scan.peaks) {
      if (peak.labeled) amps[{peak.mg, peak.me}] = peak.amplitude;
    }
    double sim_max = 0.0;
    for (const auto& [label, amp] : amps) sim_max = std::max(sim_max, amp);
    double sse = 0.0;
    int common = 0;
    for (const auto& [label, ref_amp] : ref_amps) {
      const auto it = amps.find(label);
      if (it == amps.end() || sim_max <= 0 || ref_max <= 0) continue;
      const double d = ref_amp / ref_max - it->second / sim_max;
      sse += d * d;
      ++common;
    }
    if (common < 3) sse = std::numeric_limits<double>::infinity();
    result.misfit.emplace_back(r, sse);
    if (sse < best_misfit) {
      best_misfit = sse;
      result.best_r = r;
    }
  }
  return result;
}

} // namespace cptsim
