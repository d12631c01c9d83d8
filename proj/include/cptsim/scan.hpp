#pragma once

// Parameter sweeps over the full solver: Raman-detuning spectra with peak
// extraction, intensity sweeps of width/amplitude, trap-population sweeps,
// and the relaxation-ratio fit against a reference spectrum.
//
// Axis convention: spectra are reported against the *modulation-frequency*
// detuning in Hz (the quantity scanned in experiments, measured from half
// the ground hyperfine splitting).  Both sidebands move apart, so the Raman
// detuning is twice the modulation detuning: Delta_R = 2 * 2*pi * x_hz.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cptsim/coupling.hpp"
#include "cptsim/levels.hpp"
#include "cptsim/relaxation.hpp"
#include "cptsim/solver.hpp"

namespace cptsim {

enum class ObservableKind { excited_population, transmittance };

struct ScanConfig {
  RelaxationConfig cell;
  double b_field = 0.0;            // tesla
  PolarizationScheme scheme = PolarizationScheme::sigma_minus();
  int tuned_f_prime = 4;           // 3 or 4
  double intensity1 = 0.0;         // W/m^2 per sideband (see flag below)
  double intensity2 = 0.0;
  bool intensities_are_total = false;
  LinNormalization lin_norm = LinNormalization::split;
  double delta_opt_offset = 0.0;   // angular, added to -/+ Delta'_hfs/2

  double scan_min_hz = 0.0;        // modulation-axis detuning range
  double scan_max_hz = 0.0;
  int points = 601;                // uniform base grid
  bool refine = true;              // add predicted-resonance and bisection points
  int workers = 0;                 // 0 = hardware concurrency

  ObservableKind observable = ObservableKind::excited_population;
  double alpha = 1.0;              // transmittance scale
  SolverOptions solver;
};

struct Peak {
  bool labeled = false;
  int mg = 0, me = 0;        // (m_g, m_e) resonance label when `labeled`
  double center_hz = 0.0;    // modulation axis
  double amplitude = 0.0;    // |extremum - local baseline|
  double fwhm_hz = 0.0;      // 0 when unmeasurable
  bool overlapped = false;   // neighbors closer than 3x FWHM: width omitted
};

struct SpectrumScan {
  std::vector<double> detuning_hz; // sorted, modulation axis
  std::vector<double> value;
  ObservableKind observable = ObservableKind::excited_population;
  std::vector<Peak> peaks;
};

struct PredictedResonance {
  int mg = 0, me = 0;
  double center_hz = 0.0;   // modulation axis
  double width_hz = 0.0;    // analytic FWHM estimate on the modulation axis
};

// Resonances allowed by the scheme's selection rules, at their Breit-Rabi
// predicted centers: (m, m) for circular schemes; (m, m) plus the
// (m-1, m+1)/(m+1, m-1) doublets for lin-lin schemes.
std::vector<PredictedResonance> predicted_resonances(const AtomicData& atom,
                                                     const ScanConfig& config);

// Runs one steady-state solve per grid point (parallel over a worker pool;
// results are deterministic and independent of worker count), then detects,
// measures, and labels peaks.
SpectrumScan run_scan(const AtomicData& atom, const ScanConfig& config);

// Assigns (m_g, m_e) labels to detected peaks by nearest predicted center;
// peaks with no prediction within a third of the local spacing stay
// unlabeled.  Exposed separately so external spectra can be labeled too.
void label_peaks(std::vector<Peak>& peaks, const std::vector<PredictedResonance>& predictions);

// Full width at half maximum above the local baseline, by linear
// interpolation of the half crossings.  Returns std::nullopt (and flags the
// peak `overlapped`) when a neighboring peak sits closer than 3x the width.
std::optional<double> measure_fwhm(const SpectrumScan& scan, Peak& peak);

// Single steady-state solve at one modulation detuning (helper for sweeps
// and tests).
Eigen::MatrixXcd solve_at(const AtomicData& atom, const ScanConfig& config,
                          double detuning_hz);

struct IntensityPoint {
  double intensity_w_m2 = 0.0;
  double width_hz = 0.0;
  double amplitude = 0.0; // raw observable units (relative scale free)
};

// Width and amplitude of one labeled resonance versus per-sideband
// intensity.  The scan window follows the predicted center.
std::vector<IntensityPoint> intensity_sweep(const AtomicData& atom,
                                            ScanConfig config,
                                            const std::vector<double>& intensities,
                                            int mg, int me);

struct TrapPoint {
  double intensity_w_m2 = 0.0;
  double trap_population = 0.0;
};

// Sum of trap-state populations (from dark_ground_states of the circular
// scheme for the same tuned level) solved on the (mg, me) resonance of the
// configured scheme, versus per-sideband intensity.
std::vector<TrapPoint> trap_population_sweep(const AtomicData& atom,
                                             ScanConfig config,
                                             const std::vector<double>& intensities,
                                             int mg, int me);

struct RFitResult {
  double best_r = 0.0;
  std::vector<std::pair<double, double>> misfit; // (r, sum of squared errors)
  int matched_peaks = 0;
};

// Fits the uniform-relaxation fraction r by matching normalized peak
// amplitude patterns between a reference spectrum and simulations over the
// r grid.  Throws std::runtime_error if fewer than 3 reference peaks match
// predicted resonances.
RFitResult fit_relaxation_ratio(const AtomicData& atom, ScanConfig config,
                                const std::vector<double>& reference_detuning_hz,
                                const std::vector<double>& reference_value,
                                const std::vector<double>& r_grid);

} // namespace cptsim
