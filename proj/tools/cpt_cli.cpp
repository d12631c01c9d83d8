// cpt: steady-state simulator for CPT resonance spectra of the 133Cs D1
// line.  Subcommands: spectrum, sweep, lineshape, fit-r, validate.
// Exit codes: 0 ok, 2 configuration/usage error, 3 numerical failure,
// 4 validation failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cptsim/config.hpp"
#include "cptsim/constants.hpp"
#include "cptsim/coupling.hpp"
#include "cptsim/levels.hpp"
#include "cptsim/lineshape.hpp"
#include "cptsim/relaxation.hpp"
#include "cptsim/scan.hpp"
#include "cptsim/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cptsim;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  int workers = -1;     // -1: keep config value
  long long seed = -1;  // -1: keep config value
};

void add_common_flags(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "Configuration file path");
  cmd->add_option("--preset", args->preset, "Named preset from the presets directory");
  cmd->add_option("--out", args->out_dir, "Output directory (created if missing)");
  cmd->add_option("--workers", args->workers, "Worker threads for scans (0 = all cores)");
  cmd->add_option("--seed", args->seed, "Random seed for randomized checks");
}

// Loads and resolves the run configuration.  A --seed flag is materialized
// through the documented environment override so it lands in the manifest;
// --workers only changes the runtime thread count and never the manifest.
RunConfig load_config(const CommonArgs& args) {
  if (!args.config_path.empty() && !args.preset.empty()) {
    throw std::invalid_argument("--config and --preset are mutually exclusive");
  }
  if (args.seed >= 0) {
    setenv(env_name_for_key("seed").c_str(),
           std::to_string(args.seed).c_str(), 1);
  }
  RunConfig rc;
  if (!args.config_path.empty()) {
    rc = RunConfig::from_file(args.config_path);
  } else if (!args.preset.empty()) {
    rc = RunConfig::from_file(find_preset(args.preset));
  } else {
    rc = RunConfig::from_text("");
  }
  if (args.workers >= 0) rc.scan.workers = args.workers;
  return rc;
}

AtomicData load_atom(const RunConfig& rc) {
  return load_atomic_data(rc.data_file.empty() ? default_data_file()
                                               : rc.data_file);
}

std::string data_file_hash(const RunConfig& rc) {
  const std::string path =
      rc.data_file.empty() ? default_data_file() : rc.data_file;
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a_hex(buf.str());
}

void ensure_out_dir(const std::string& dir) {
  if (!dir.empty() && dir != ".") fs::create_directories(dir);
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write output file: " + path.string());
  return out;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  std::ofstream out = open_output(dir, name);
  out << j.dump(2) << "\n";
}

void write_manifest(const RunConfig& rc, const std::string& dir,
                    const std::string& command) {
  json j;
  j["command"] = command;
  j["version"] = CPTSIM_VERSION;
  j["manifest_hash"] = rc.manifest_hash;
  j["config_text"] = rc.manifest_text;
  j["seed"] = rc.seed;
  j["data_file_hash"] = data_file_hash(rc);
  write_json(dir, "run_manifest.json", j);
}

std::string peak_label(const Peak& peak) {
  if (!peak.labeled) return "unassigned";
  return "(" + std::to_string(peak.mg) + "," + std::to_string(peak.me) + ")";
}

std::string scheme_name(const PolarizationScheme& scheme) {
  switch (scheme.kind) {
    case SchemeKind::sigma_plus_pair: return "sigma_plus";
    case SchemeKind::sigma_minus_pair: return "sigma_minus";
    case SchemeKind::lin_lin:
      if (scheme.theta == 0.0) return "lin_parallel";
      if (scheme.theta == constants::pi / 2.0) return "lin_perpendicular";
      return "lin_theta(" + format_full(scheme.theta) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------- spectrum
int cmd_spectrum(const CommonArgs& args) {
  const RunConfig rc = load_config(args);
  const AtomicData atom = load_atom(rc);
  ensure_out_dir(args.out_dir);

  const SpectrumScan scan = run_scan(atom, rc.scan);

  std::ofstream csv = open_output(args.out_dir, "spectrum.csv");
  csv << "# manifest " << rc.manifest_hash << "\n";
  csv << "detuning_hz,value\n";
  for (size_t i = 0; i < scan.detuning_hz.size(); ++i) {
    csv << format_full(scan.detuning_hz[i]) << ","
        << format_full(scan.value[i]) << "\n";
  }

  json peaks = json::array();
  for (const Peak& peak : scan.peaks) {
    peaks.push_back({{"label", peak_label(peak)},
                     {"labeled", peak.labeled},
                     {"mg", peak.mg},
                     {"me", peak.me},
                     {"center_hz", peak.center_hz},
                     {"fwhm_hz", peak.fwhm_hz},
                     {"overlapped", peak.overlapped},
                     {"amplitude", peak.amplitude}});
  }
  write_json(args.out_dir, "peaks.json",
             {{"manifest_hash", rc.manifest_hash},
              {"observable", rc.scan.observable == ObservableKind::transmittance
                                 ? "transmittance"
                                 : "excited_population"},
              {"peaks", peaks}});
  write_manifest(rc, args.out_dir, "spectrum");

  std::cout << "spectrum: " << scan.detuning_hz.size() << " points, "
            << scan.peaks.size() << " peaks -> " << args.out_dir << "\n";
  return 0;
}

// ------------------------------------------------------------------- sweep
int cmd_sweep(const CommonArgs& args) {
  const RunConfig rc = load_config(args);
  const AtomicData atom = load_atom(rc);
  ensure_out_dir(args.out_dir);

  if (rc.sweep_intensities.empty()) {
    throw std::invalid_argument("sweep: sweep.intensities is empty");
  }
  std::vector<SweepCurve> curves = rc.sweep_curves;
  if (curves.empty()) {
    SweepCurve curve;
    curve.scheme = rc.scan.scheme;
    curve.tuned_f_prime = rc.scan.tuned_f_prime;
    curve.mg = 0;
    curve.me = 0;
    curve.label = scheme_name(curve.scheme) + "/" +
                  std::to_string(curve.tuned_f_prime) + "/0:0";
    curves.push_back(curve);
  }

  std::ofstream csv = open_output(args.out_dir, "sweep.csv");
  csv << "# manifest " << rc.manifest_hash << "\n";

  if (rc.sweep_kind == RunConfig::SweepKind::trap) {
    csv << "curve,intensity_uw_mm2,trap_population\n";
    for (const SweepCurve& curve : curves) {
      ScanConfig config = rc.scan;
      config.scheme = curve.scheme;
      config.tuned_f_prime = curve.tuned_f_prime;
      const std::vector<TrapPoint> points = trap_population_sweep(
          atom, config, rc.sweep_intensities, curve.mg, curve.me);
      for (const TrapPoint& point : points) {
        csv << curve.label << "," << format_full(point.intensity_w_m2) << ","
            << format_full(point.trap_population) << "\n";
      }
    }
  } else {
    // Two passes: amplitudes are reported relative to the largest amplitude
    // across all curves and intensities.
    std::vector<std::vector<IntensityPoint>> results;
    double max_amplitude = 0.0;
    for (const SweepCurve& curve : curves) {
      ScanConfig config = rc.scan;
      config.scheme = curve.scheme;
      config.tuned_f_prime = curve.tuned_f_prime;
      results.push_back(intensity_sweep(atom, config, rc.sweep_intensities,
                                        curve.mg, curve.me));
      for (const IntensityPoint& point : results.back()) {
        max_amplitude = std::max(max_amplitude, point.amplitude);
      }
    }
    csv << "curve,intensity_uw_mm2,width_hz,amplitude_rel\n";
    for (size_t c = 0; c < curves.size(); ++c) {
      for (const IntensityPoint& point : results[c]) {
        const double rel =
            max_amplitude > 0 ? point.amplitude / max_amplitude : 0.0;
        csv << curves[c].label << "," << format_full(point.intensity_w_m2)
            << "," << format_full(point.width_hz) << "," << format_full(rel)
            << "\n";
      }
    }
  }
  write_manifest(rc, args.out_dir, "sweep");
  std::cout << "sweep: " << curves.size() << " curve(s) x "
            << rc.sweep_intensities.size() << " intensities -> "
            << args.out_dir << "\n";
  return 0;
}

// --------------------------------------------------------------- lineshape
int cmd_lineshape(const CommonArgs& args) {
  const RunConfig rc = load_config(args);
  const AtomicData atom = load_atom(rc);
  ensure_out_dir(args.out_dir);

  const Sublevel g = decompose(rc.lineshape_g);
  const Sublevel e = decompose(rc.lineshape_e);
  if (g.manifold != Manifold::ground || g.f != 3 ||
      e.manifold != Manifold::ground || e.f != 4) {
    throw std::invalid_argument(
        "lineshape: lineshape.g must be an F=3 level (1..7) and lineshape.e "
        "an F=4 level (8..16)");
  }

  const ScanConfig& sc = rc.scan;
  const Eigen::VectorXd omega_b = zeeman_energies(atom, sc.b_field);
  const double delta_opt =
      delta_opt_for_tuned_level(atom, sc.tuned_f_prime, sc.delta_opt_offset);
  const CouplingMatrix coupling = build_bichromatic_coupling(
      atom, sc.scheme,
      FieldAmplitudes::from_intensities(sc.intensity1, sc.intensity2,
                                        sc.intensities_are_total),
      {sc.lin_norm});

  // Modulation-axis resonance center from the Breit-Rabi energies.
  const double e3 = breit_rabi_energy(atom.hfs_ground, atom.gj_ground, atom.gi,
                                      atom.nuclear_spin, 3, g.m, sc.b_field);
  const double e4 = breit_rabi_energy(atom.hfs_ground, atom.gj_ground, atom.gi,
                                      atom.nuclear_spin, 4, e.m, sc.b_field);
  const double center_hz =
      (e4 - e3 - atom.hfs_ground) / (2.0 * constants::two_pi);

  const double gamma_f = (sc.cell.gamma_p + sc.cell.big_gamma) / 2.0;
  const Eigen::VectorXd detuning = detuning_vector(
      atom, omega_b, 2.0 * constants::two_pi * center_hz, delta_opt);
  const LambdaSystem lambda{rc.lineshape_g, rc.lineshape_e};
  const LineshapeParams params =
      lineshape_params(lambda, atom, coupling.omega, detuning, delta_opt,
                       sc.cell.gamma_p, gamma_f, 1.0 / 16.0, 1.0 / 16.0);

  // Curve over the configured scan window, expressed as two-photon detuning
  // relative to the resonance: x = 2 * 2pi * (detuning_hz - center_hz).
  const int points = std::max(3, sc.points);
  std::vector<double> delta_ge(points);
  for (int i = 0; i < points; ++i) {
    const double hz = sc.scan_min_hz + (sc.scan_max_hz - sc.scan_min_hz) *
                                           static_cast<double>(i) /
                                           (points - 1);
    delta_ge[i] = 2.0 * constants::two_pi * (hz - center_hz);
  }
  const std::vector<AnalyticPoint> curve = analytic_spectrum(
      params, delta_ge, sc.tuned_f_prime, sc.alpha, sc.cell.big_gamma);

  std::ofstream csv = open_output(args.out_dir, "lineshape.csv");
  csv << "# manifest " << rc.manifest_hash << "\n";
  csv << "detuning_hz,re_rho_ge,f2_tuned\n";
  for (int i = 0; i < points; ++i) {
    const double hz = center_hz + curve[i].delta_ge / (2.0 * constants::two_pi);
    csv << format_full(hz) << "," << format_full(curve[i].re_rho_ge) << ","
        << format_full(curve[i].f2_tuned) << "\n";
  }

  write_json(args.out_dir, "lineshape.json",
             {{"manifest_hash", rc.manifest_hash},
              {"g_level", rc.lineshape_g},
              {"e_level", rc.lineshape_e},
              {"center_hz", center_hz},
              // Modulation-axis figures: FWHM = width/2pi, shift = LS/(4 pi).
              {"fwhm_hz", params.width / constants::two_pi},
              {"light_shift_hz",
               params.light_shift / (2.0 * constants::two_pi)},
              {"width_angular", params.width},
              {"light_shift_angular", params.light_shift},
              {"c_re", params.c.real()},
              {"c_im", params.c.imag()}});
  write_manifest(rc, args.out_dir, "lineshape");
  std::cout << "lineshape: (" << g.m << "," << e.m << ") FWHM "
            << params.width / constants::two_pi << " Hz -> " << args.out_dir
            << "\n";
  return 0;
}

// ------------------------------------------------------------------- fit-r
std::pair<std::vector<double>, std::vector<double>> read_reference_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("fit-r: cannot open reference CSV: " + path);
  std::vector<double> xs, ys;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      // Require the documented header.
      std::string squashed;
      for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) squashed += c;
      }
      if (squashed != "detuning_hz,value") {
        throw std::invalid_argument(
            "fit-r: reference CSV must start with header 'detuning_hz,value' "
            "(line " + std::to_string(line_no) + ")");
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("fit-r: malformed CSV line " +
                                  std::to_string(line_no));
    }
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      ys.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::invalid_argument("fit-r: non-numeric CSV line " +
                                  std::to_string(line_no));
    }
  }
  if (!header_seen) {
    throw std::invalid_argument("fit-r: reference CSV has no header line");
  }
  return {xs, ys};
}

int cmd_fit_r(const CommonArgs& args, const std::string& reference,
              std::vector<double> r_grid) {
  const RunConfig rc = load_config(args);
  const AtomicData atom = load_atom(rc);
  ensure_out_dir(args.out_dir);

  if (reference.empty()) {
    throw std::invalid_argument("fit-r: --reference CSV is required");
  }
  if (r_grid.empty()) {
    for (int i = 0; i <= 20; ++i) r_grid.push_back(i * 0.05);
  }
  for (double r : r_grid) {
    if (r < 0.0 || r > 1.0) {
      throw std::invalid_argument("fit-r: r values must lie in [0, 1]");
    }
  }

  const auto [xs, ys] = read_reference_csv(reference);
  const RFitResult fit = fit_relaxation_ratio(atom, rc.scan, xs, ys, r_grid);

  std::ofstream csv = open_output(args.out_dir, "fit_r.csv");
  csv << "# manifest " << rc.manifest_hash << "\n";
  csv << "r,misfit\n";
  for (const auto& [r, sse] : fit.misfit) {
    csv << format_full(r) << "," << format_full(sse) << "\n";
  }
  write_json(args.out_dir, "fit_r.json",
             {{"manifest_hash", rc.manifest_hash},
              {"best_r", fit.best_r},
              {"matched_peaks", fit.matched_peaks}});
  write_manifest(rc, args.out_dir, "fit-r");
  std::cout << "fit-r: best r = " << fit.best_r << " ("
            << fit.matched_peaks << " matched peaks) -> " << args.out_dir
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- validate
int cmd_validate(const CommonArgs& args, double tolerance_scale,
                 bool inject_cg_fault) {
  const RunConfig rc = load_config(args);
  const AtomicData atom = load_atom(rc);

  ValidationOptions options;
  options.tolerance_scale = tolerance_scale;
  options.seed = rc.seed;
  options.inject_cg_fault = inject_cg_fault;

  const std::vector<ValidationCheck> checks = run_validation(atom, options);

  int failed = 0;
  json report = json::array();
  for (const ValidationCheck& check : checks) {
    if (!check.passed) ++failed;
    std::printf("[%s] %-28s residual %.3e  bound %.3e\n",
                check.passed ? "PASS" : "FAIL", check.name.c_str(),
                check.residual, check.bound);
    report.push_back({{"name", check.name},
                      {"residual", check.residual},
                      {"bound", check.bound},
                      {"passed", check.passed}});
  }
  std::printf("%d/%zu checks passed\n", static_cast<int>(checks.size()) - failed,
              checks.size());

  if (!args.out_dir.empty()) {
    ensure_out_dir(args.out_dir);
    write_json(args.out_dir, "validation.json",
               {{"manifest_hash", rc.manifest_hash},
                {"tolerance_scale", tolerance_scale},
                {"checks", report}});
    write_manifest(rc, args.out_dir, "validate");
  }
  return failed == 0 ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPT resonance simulator for the 133Cs D1 line"};
  app.require_subcommand(1);

  CommonArgs spectrum_args, sweep_args, lineshape_args, fitr_args,
      validate_args;
  std::string reference;
  std::vector<double> r_grid;
  double tolerance_scale = 1.0;
  bool inject_cg_fault = false;

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "Solve a Raman-detuning spectrum and extract peaks");
  add_common_flags(spectrum, &spectrum_args);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Width/amplitude or trap-population intensity sweeps");
  add_common_flags(sweep, &sweep_args);

  CLI::App* lineshape = app.add_subcommand(
      "lineshape", "Closed-form lineshape parameters and analytic curve");
  add_common_flags(lineshape, &lineshape_args);

  CLI::App* fitr = app.add_subcommand(
      "fit-r", "Fit the uniform-relaxation fraction r to a reference spectrum");
  add_common_flags(fitr, &fitr_args);
  fitr->add_option("--reference", reference,
                   "Reference spectrum CSV (header detuning_hz,value)");
  fitr->add_option("--r-grid", r_grid,
                   "Candidate r values (default 0, 0.05, ..., 1)");

  CLI::App* validate = app.add_subcommand(
      "validate", "Run the self-validation suite (exit 4 on failure)");
  add_common_flags(validate, &validate_args);
  validate->add_option("--tolerance-scale", tolerance_scale,
                       "Scale factor on all validation bounds (<1 tightens)");
  validate->add_flag("--inject-cg-fault", inject_cg_fault,
                     "Perturb one cached CG entry (proves the check trips)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2; // help/version exit 0; usage errors exit 2
  }

  const auto dispatch = [&]() -> int {
    if (spectrum->parsed()) return cmd_spectrum(spectrum_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (lineshape->parsed()) return cmd_lineshape(lineshape_args);
    if (fitr->parsed()) return cmd_fit_r(fitr_args, reference, r_grid);
    if (validate->parsed()) {
      return cmd_validate(validate_args, tolerance_scale, inject_cg_fault);
    }
    return 2;
  };

  try {
    return dispatch();
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << " (line " << e.line
              << ", column " << e.column << ")\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
