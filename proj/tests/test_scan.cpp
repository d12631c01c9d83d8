#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cptsim/constants.hpp"
#include "cptsim/observables.hpp"
#include "cptsim/scan.hpp"

using cptsim::AtomicData;
using cptsim::ObservableKind;
using cptsim::Peak;
using cptsim::PolarizationScheme;
using cptsim::PredictedResonance;
using cptsim::ScanConfig;
using cptsim::SpectrumScan;
namespace constants = cptsim::constants;

namespace {

AtomicData atom() {
  static AtomicData a = cptsim::load_atomic_data(cptsim::default_data_file());
  return a;
}

// sigma-minus / F'=4, 139 uT, Cell-2-like rates, 6.6 W/m^2 per sideband
ScanConfig base_config() {
  ScanConfig cfg;
  cfg.cell = {constants::two_pi * 107.0, constants::two_pi * 0.51e9, 0.6};
  cfg.b_field = 139e-6;
  cfg.scheme = PolarizationScheme::sigma_minus();
  cfg.tuned_f_prime = 4;
  cfg.intensity1 = 6.6;
  cfg.intensity2 = 6.6;
  cfg.workers = 1;
  return cfg;
}

SpectrumScan synthetic_peak(double center, double hwhm, ObservableKind kind) {
  SpectrumScan scan;
  scan.observable = kind;
  for (int i = 0; i <= 400; ++i) {
    const double x = -500.0 + 2.5 * i;
    const double lorentz =
        hwhm * hwhm / ((x - center) * (x - center) + hwhm * hwhm);
    scan.detuning_hz.push_back(x);
    if (kind == ObservableKind::transmittance) {
      scan.value.push_back(0.9 + 0.1 * lorentz);
    } else {
      scan.value.push_back(1e-6 * (1.0 - 0.5 * lorentz));
    }
  }
  return scan;
}

} // namespace

TEST_CASE("full width at half maximum on synthetic lorentzians") {
  SUBCASE("transmittance peak (points up)") {
    SpectrumScan scan = synthetic_peak(0.0, 50.0, ObservableKind::transmittance);
    Peak peak;
    peak.center_hz = 0.0;
    scan.peaks.push_back(peak);
    const auto fwhm = cptsim::measure_fwhm(scan, scan.peaks[0]);
    REQUIRE(fwhm.has_value());
    CHECK(*fwhm == doctest::Approx(100.0).epsilon(0.02));
    CHECK(scan.peaks[0].fwhm_hz == *fwhm);
    CHECK_FALSE(scan.peaks[0].overlapped);
  }
  SUBCASE("excited-population dip (points down)") {
    SpectrumScan scan = synthetic_peak(40.0, 30.0, ObservableKind::excited_population);
    Peak peak;
    peak.center_hz = 40.0;
    scan.peaks.push_back(peak);
    const auto fwhm = cptsim::measure_fwhm(scan, scan.peaks[0]);
    REQUIRE(fwhm.has_value());
    CHECK(*fwhm == doctest::Approx(60.0).epsilon(0.03));
  }
  SUBCASE("close neighbors suppress the width and set the overlap flag") {
    SpectrumScan scan = synthetic_peak(-130.0, 50.0, ObservableKind::transmittance);
    for (size_t i = 0; i < scan.detuning_hz.size(); ++i) {
      const double x = scan.detuning_hz[i] - 130.0;
      scan.value[i] += 0.1 * 2500.0 / (x * x + 2500.0);
    }
    Peak a, b;
    a.center_hz = -130.0;
    b.center_hz = 130.0;
    scan.peaks.push_back(a);
    scan.peaks.push_back(b);
    const auto fwhm = cptsim::measure_fwhm(scan, scan.peaks[0]);
    CHECK_FALSE(fwhm.has_value());
    CHECK(scan.peaks[0].overlapped);
    CHECK(scan.peaks[0].fwhm_hz == 0.0);
  }
}

TEST_CASE("peak labeling uses a third of the prediction spacing") {
  std::vector<PredictedResonance> predictions(3);
  predictions[0].mg = -1;
  predictions[0].me = -1;
  predictions[0].center_hz = -1000.0;
  predictions[1].mg = 0;
  predictions[1].me = 0;
  predictions[1].center_hz = 0.0;
  predictions[2].mg = 1;
  predictions[2].me = 1;
  predictions[2].center_hz = 1000.0;

  std::vector<Peak> peaks(2);
  peaks[0].center_hz = -980.0; // 20 Hz from a prediction: labeled
  peaks[1].center_hz = 450.0;  // 450 Hz > 1000/3: unlabeled
  cptsim::label_peaks(peaks, predictions);
  CHECK(peaks[0].labeled);
  CHECK(peaks[0].mg == -1);
  CHECK(peaks[0].me == -1);
  CHECK_FALSE(peaks[1].labeled);
}

TEST_CASE("predicted resonances: selection rules, centers, and zero-power width") {
  ScanConfig cfg = base_config();

  SUBCASE("circular scheme lists the seven (m, m) pairs") {
    const auto predictions = cptsim::predicted_resonances(atom(), cfg);
    CHECK(predictions.size() == 7);
    CHECK(std::is_sorted(predictions.begin(), predictions.end(),
                         [](const PredictedResonance& a, const PredictedResonance& b) {
                           return a.center_hz < b.center_hz;
                         }));
    for (const auto& p : predictions) {
      CHECK(p.mg == p.me);
      CHECK(p.width_hz > 0.0);
    }
    // modulation-axis centers frozen from an independent implementation
    // (half of the Raman-axis offsets)
    const auto find = [&](int m) {
      for (const auto& p : predictions) {
        if (p.mg == m) return p.center_hz;
      }
      FAIL("missing prediction");
      return 0.0;
    };
    CHECK(std::abs(find(0) - 825.9 / 2.0) <= 0.2);
    CHECK(std::abs(find(-1) - (-973394.2 / 2.0)) <= 0.3);
    CHECK(std::abs(find(1) - (974942.7 / 2.0)) <= 0.3);
  }
  SUBCASE("lin-lin scheme adds the (m, m +/- 2) doublets") {
    cfg.scheme = PolarizationScheme::lin_parallel();
    cfg.tuned_f_prime = 3;
    cfg.b_field = 285e-6;
    const auto predictions = cptsim::predicted_resonances(atom(), cfg);
    CHECK(predictions.size() == 19);
    bool minus_plus = false, plus_minus = false;
    for (const auto& p : predictions) {
      if (p.mg == -1 && p.me == 1) {
        minus_plus = true;
        CHECK(std::abs(p.center_hz - 73.0 / 2.0) <= 0.3);
      }
      if (p.mg == 1 && p.me == -1) {
        plus_minus = true;
        CHECK(std::abs(p.center_hz - 6437.0 / 2.0) <= 0.3);
      }
    }
    CHECK(minus_plus);
    CHECK(plus_minus);
  }
  SUBCASE("zero power reduces the predicted width to the ground rate") {
    cfg.intensity1 = 0.0;
    cfg.intensity2 = 0.0;
    const auto predictions = cptsim::predicted_resonances(atom(), cfg);
    for (const auto& p : predictions) {
      CHECK(p.width_hz == doctest::Approx(107.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("spectrum scan finds and measures the clock resonance") {
  ScanConfig cfg = base_config();
  cfg.scan_min_hz = -2600.0;
  cfg.scan_max_hz = 3400.0;
  cfg.points = 61;

  const SpectrumScan scan = cptsim::run_scan(atom(), cfg);
  CHECK(scan.value.size() == scan.detuning_hz.size());
  CHECK(std::is_sorted(scan.detuning_hz.begin(), scan.detuning_hz.end()));
  for (double v : scan.value) CHECK(v > 0.0);

  const Peak* clock = nullptr;
  for (const Peak& peak : scan.peaks) {
    if (peak.labeled && peak.mg == 0 && peak.me == 0) clock = &peak;
  }
  REQUIRE(clock != nullptr);
  CHECK(std::abs(clock->center_hz - 412.95) <= 25.0);
  CHECK(clock->amplitude > 0.0);
  CHECK_FALSE(clock->overlapped);
  // frozen full-solver width at 6.6 W/m^2: about 572 Hz on this axis
  CHECK(clock->fwhm_hz > 450.0);
  CHECK(clock->fwhm_hz < 700.0);
}

TEST_CASE("scan results are independent of the worker count") {
  ScanConfig cfg = base_config();
  cfg.scan_min_hz = -1000.0;
  cfg.scan_max_hz = 1800.0;
  cfg.points = 21;
  cfg.refine = false;
  cfg.observable = ObservableKind::transmittance;

  cfg.workers = 1;
  const SpectrumScan serial = cptsim::run_scan(atom(), cfg);
  cfg.workers = 4;
  const SpectrumScan parallel = cptsim::run_scan(atom(), cfg);
  REQUIRE(serial.value.size() == parallel.value.size());
  for (size_t i = 0; i < serial.value.size(); ++i) {
    CHECK(serial.detuning_hz[i] == parallel.detuning_hz[i]);
    CHECK(serial.value[i] == parallel.value[i]);
  }
}

TEST_CASE("single-point solve honors the modulation-axis convention") {
  const ScanConfig cfg = base_config();
  const Eigen::MatrixXcd on = cptsim::solve_at(atom(), cfg, 412.95);
  const Eigen::MatrixXcd off = cptsim::solve_at(atom(), cfg, 2412.95);
  CHECK(cptsim::trace_defect(on) <= 1e-10);
  CHECK(cptsim::hermiticity_defect(on) <= 1e-12);
  // the dark resonance sits at half the Raman-axis offset
  CHECK(cptsim::excited_population(on) < cptsim::excited_population(off));
}

TEST_CASE("intensity sweep reports zero at no power and widths at power") {
  const ScanConfig cfg = base_config();
  const auto points = cptsim::intensity_sweep(atom(), cfg, {0.0, 6.6}, 0, 0);
  REQUIRE(points.size() == 2);
  CHECK(points[0].intensity_w_m2 == 0.0);
  CHECK(points[0].width_hz == 0.0);
  CHECK(points[0].amplitude == 0.0);
  CHECK(points[1].intensity_w_m2 == 6.6);
  CHECK(points[1].width_hz > 450.0);
  CHECK(points[1].width_hz < 700.0);
  CHECK(points[1].amplitude > 0.0);
  CHECK_THROWS_AS(
      (void)cptsim::intensity_sweep(atom(), cfg, {1.0}, 3, -3),
      std::invalid_argument);
}

TEST_CASE("trap populations at zero power equal the thermal fractions") {
  ScanConfig cfg = base_config();
  SUBCASE("one trap state out of sixteen") {
    const auto points = cptsim::trap_population_sweep(atom(), cfg, {0.0}, 0, 0);
    REQUIRE(points.size() == 1);
    CHECK(std::abs(points[0].trap_population - 1.0 / 16.0) <= 1e-6);
  }
  SUBCASE("three trap states out of sixteen") {
    cfg.tuned_f_prime = 3;
    const auto points = cptsim::trap_population_sweep(atom(), cfg, {0.0}, 0, 0);
    REQUIRE(points.size() == 1);
    CHECK(std::abs(points[0].trap_population - 3.0 / 16.0) <= 1e-6);
  }
}

TEST_CASE("relaxation-ratio fit recovers the generating value") {
  ScanConfig cfg = base_config();
  cfg.b_field = 22.7e-6; // close resonance ladder: three peaks in one window
  cfg.scan_min_hz = -130e3;
  cfg.scan_max_hz = 130e3;
  cfg.points = 31;

  const SpectrumScan reference = cptsim::run_scan(atom(), cfg);
  const auto fit = cptsim::fit_relaxation_ratio(
      atom(), cfg, reference.detuning_hz, reference.value, {0.3, 0.6});
  CHECK(fit.best_r == 0.6);
  CHECK(fit.matched_peaks >= 3);
  REQUIRE(fit.misfit.size() == 2);
  const double sse_03 = fit.misfit[0].second;
  const double sse_06 = fit.misfit[1].second;
  CHECK(sse_06 < sse_03);
  CHECK(sse_06 <= 1e-20); // the reference came from the same configuration
}

TEST_CASE("scan input validation") {
  ScanConfig cfg = base_config();
  SUBCASE("empty range") {
    cfg.scan_min_hz = 100.0;
    cfg.scan_max_hz = 100.0;
    CHECK_THROWS_AS((void)cptsim::run_scan(atom(), cfg), std::invalid_argument);
  }
  SUBCASE("too few points") {
    cfg.scan_min_hz = -100.0;
    cfg.scan_max_hz = 100.0;
    cfg.points = 2;
    CHECK_THROWS_AS((void)cptsim::run_scan(atom(), cfg), std::invalid_argument);
  }
  SUBCASE("negative intensity") {
    cfg.intensity1 = -1.0;
    cfg.scan_min_hz = -100.0;
    cfg.scan_max_hz = 100.0;
    CHECK_THROWS_AS((void)cptsim::run_scan(atom(), cfg), std::invalid_argument);
  }
  SUBCASE("invalid tuned manifold") {
    cfg.tuned_f_prime = 5;
    cfg.scan_min_hz = -100.0;
    cfg.scan_max_hz = 100.0;
    CHECK_THROWS_AS((void)cptsim::run_scan(atom(), cfg), std::invalid_argument);
  }
  SUBCASE("short reference rejects the fit") {
    CHECK_THROWS_AS((void)cptsim::fit_relaxation_ratio(atom(), cfg, {0.0, 1.0},
                                                       {0.0, 1.0}, {0.5}),
                    std::invalid_argument);
  }
  SUBCASE("flat reference has no matching peaks") {
    cfg.scan_min_hz = -130e3;
    cfg.scan_max_hz = 130e3;
    std::vector<double> xs, ys;
    for (int i = 0; i < 50; ++i) {
      xs.push_back(-130e3 + i * 5.3e3);
      ys.push_back(1.0);
    }
    CHECK_THROWS_AS(
        (void)cptsim::fit_relaxation_ratio(atom(), cfg, xs, ys, {0.5}),
        std::runtime_error);
  }
}
