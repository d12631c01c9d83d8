#include "cptsim/config.hpp"

#include "cptsim/constants.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cptsim {

namespace {

using constants::two_pi;

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "cell.gamma_p",
      "cell.big_gamma",
      "cell.r",
      "field.b",
      "drive.scheme",
      "drive.theta",
      "drive.tuned_f_prime",
      "drive.intensity1",
      "drive.intensity2",
      "drive.intensities_are_total",
      "drive.lin_normalization",
      "drive.delta_opt_offset",
      "scan.min",
      "scan.max",
      "scan.points",
      "scan.refine",
      "scan.observable",
      "scan.alpha",
      "scan.workers",
      "solver.residual_tol",
      "solver.force_dense",
      "sweep.kind",
      "sweep.intensities",
      "sweep.mg",
      "sweep.me",
      "sweep.curves",
      "lineshape.g",
      "lineshape.e",
      "seed",
      "data_file",
  };
  return keys;
}

bool is_known_key(const std::string& key) {
  const auto& keys = known_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

int int_or(const KeyValueDocument& doc, const std::string& key, int fallback) {
  if (!doc.has(key)) return fallback;
  const double v = doc.require_number(key);
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) {
    throw std::invalid_argument("key '" + key + "' must be an integer");
  }
  return static_cast<int>(r);
}

PolarizationScheme parse_scheme(const std::string& name, double theta) {
  if (name == "sigma_plus") return PolarizationScheme::sigma_plus();
  if (name == "sigma_minus") return PolarizationScheme::sigma_minus();
  if (name == "lin_parallel") return PolarizationScheme::lin_parallel();
  if (name == "lin_perpendicular") return PolarizationScheme::lin_perpendicular();
  if (name == "lin_theta") return PolarizationScheme::lin_theta(theta);
  throw std::invalid_argument(
      "drive.scheme must be one of sigma_plus, sigma_minus, lin_parallel, "
      "lin_perpendicular, lin_theta (got '" + name + "')");
}

std::string parse_curve_token(const std::string& token, SweepCurve* curve) {
  // Format: scheme/tuned_f_prime/mg:me  e.g. sigma_minus/4/0:0
  const auto slash1 = token.find('/');
  const auto slash2 = token.find('/', slash1 + 1);
  const auto colon = token.find(':', slash2 + 1);
  if (slash1 == std::string::npos || slash2 == std::string::npos ||
      colon == std::string::npos) {
    return "expected scheme/tuned/mg:me";
  }
  try {
    curve->scheme = parse_scheme(token.substr(0, slash1), 0.0);
    curve->tuned_f_prime = std::stoi(token.substr(slash1 + 1, slash2 - slash1 - 1));
    curve->mg = std::stoi(token.substr(slash2 + 1, colon - slash2 - 1));
    curve->me = std::stoi(token.substr(colon + 1));
  } catch (const std::exception& e) {
    return e.what();
  }
  curve->label = token;
  return "";
}

} // namespace

std::string env_name_for_key(const std::string& key) {
  std::string out = "CPTSIM_";
  for (char c : key) {
    if (c == '.') {
      out += "__";
    } else {
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

RunConfig RunConfig::from_text(const std::string& text) {
  KeyValueDocument doc = KeyValueDocument::parse(text);

  for (const std::string& key : known_keys()) {
    if (const char* value = std::getenv(env_name_for_key(key).c_str())) {
      doc.set(key, value);
    }
  }
  for (const std::string& key : doc.keys()) {
    if (!is_known_key(key)) {
      throw std::invalid_argument("unknown configuration key '" + key + "' (see README for the key reference)");
    }
  }

  RunConfig rc;
  ScanConfig& scan = rc.scan;

  // Frequency accessor: with a unit suffix the parsed magnitude is already
  // angular; a bare number is read as cyclic Hz.
  const auto angular_or = [&doc](const std::string& key,
                                 double fallback_angular) {
    if (!doc.has(key)) return fallback_angular;
    const Quantity q =
        KeyValueDocument::parse_quantity(doc.require_string(key), key);
    return q.unit.empty() ? q.magnitude * two_pi : q.magnitude;
  };
  // Modulation-axis detuning in Hz: bare numbers are Hz; unit suffixes are
  // converted through the angular pipeline and back.
  const auto modulation_hz_or = [&doc](const std::string& key,
                                       double fallback_hz) {
    if (!doc.has(key)) return fallback_hz;
    const Quantity q =
        KeyValueDocument::parse_quantity(doc.require_string(key), key);
    return q.unit.empty() ? q.magnitude : q.magnitude / two_pi;
  };

  // Defaults describe the base scenario: buffer-gas cell with slow ground
  // relaxation, moderate field, sigma-minus pair tuned to F'=4.
  scan.cell.gamma_p = angular_or("cell.gamma_p", two_pi * 107.0);
  scan.cell.big_gamma = angular_or("cell.big_gamma", two_pi * 0.51e9);
  scan.cell.r = doc.number_or("cell.r", 0.6);
  scan.b_field = doc.number_or("field.b", 139e-6);
  scan.scheme = parse_scheme(doc.string_or("drive.scheme", "sigma_minus"),
                             doc.number_or("drive.theta", 0.0));
  scan.tuned_f_prime = int_or(doc, "drive.tuned_f_prime", 4);
  scan.intensity1 = doc.number_or("drive.intensity1", 6.6);
  scan.intensity2 = doc.number_or("drive.intensity2", 6.6);
  scan.intensities_are_total = doc.bool_or("drive.intensities_are_total", false);
  const std::string norm = doc.string_or("drive.lin_normalization", "split");
  if (norm == "split") {
    scan.lin_norm = LinNormalization::split;
  } else if (norm == "full") {
    scan.lin_norm = LinNormalization::full;
  } else {
    throw std::invalid_argument("drive.lin_normalization must be 'split' or 'full'");
  }
  scan.delta_opt_offset = angular_or("drive.delta_opt_offset", 0.0);
  scan.scan_min_hz = modulation_hz_or("scan.min", -3000.0);
  scan.scan_max_hz = modulation_hz_or("scan.max", 3000.0);
  scan.points = int_or(doc, "scan.points", 601);
  scan.refine = doc.bool_or("scan.refine", true);
  const std::string obs = doc.string_or("scan.observable", "excited_population");
  if (obs == "excited_population") {
    scan.observable = ObservableKind::excited_population;
  } else if (obs == "transmittance") {
    scan.observable = ObservableKind::transmittance;
  } else {
    throw std::invalid_argument(
        "scan.observable must be 'excited_population' or 'transmittance'");
  }
  scan.alpha = doc.number_or("scan.alpha", 1.0);
  scan.workers = int_or(doc, "scan.workers", 0);
  scan.solver.residual_tol = doc.number_or("solver.residual_tol", 1e-9);
  scan.solver.force_dense = doc.bool_or("solver.force_dense", false);

  const std::string sweep_kind = doc.string_or("sweep.kind", "intensity");
  if (sweep_kind == "intensity") {
    rc.sweep_kind = SweepKind::intensity;
  } else if (sweep_kind == "trap") {
    rc.sweep_kind = SweepKind::trap;
  } else {
    throw std::invalid_argument("sweep.kind must be 'intensity' or 'trap'");
  }
  rc.sweep_intensities = doc.number_list_or("sweep.intensities", {});

  if (doc.has("sweep.curves")) {
    std::istringstream in(doc.require_string("sweep.curves"));
    std::string token;
    while (std::getline(in, token, ',')) {
      // trim
      const auto b = token.find_first_not_of(" \t");
      const auto e = token.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      token = token.substr(b, e - b + 1);
      SweepCurve curve;
      const std::string err = parse_curve_token(token, &curve);
      if (!err.empty()) {
        throw std::invalid_argument("sweep.curves entry '" + token + "': " + err);
      }
      rc.sweep_curves.push_back(curve);
    }
  } else if (doc.has("sweep.mg") || doc.has("sweep.me")) {
    SweepCurve curve;
    curve.scheme = scan.scheme;
    curve.tuned_f_prime = scan.tuned_f_prime;
    curve.mg = int_or(doc, "sweep.mg", 0);
    curve.me = int_or(doc, "sweep.me", 0);
    curve.label = "configured";
    rc.sweep_curves.push_back(curve);
  }

  rc.lineshape_g = int_or(doc, "lineshape.g", 3);
  rc.lineshape_e = int_or(doc, "lineshape.e", 13);
  const double seed = doc.number_or("seed", 1.0);
  if (seed < 0) throw std::invalid_argument("seed must be >= 0");
  rc.seed = static_cast<uint64_t>(seed);
  rc.data_file = doc.string_or("data_file", "");

  rc.manifest_text = doc.canonical_text();
  rc.manifest_hash = fnv1a_hex(rc.manifest_text);
  return rc;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_text(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line, e.column);
  }
}

std::string find_preset(const std::string& name) {
  namespace fs = std::filesystem;
  std::vector<std::string> dirs;
  if (const char* env = std::getenv("CPTSIM_PRESET_DIR")) dirs.push_back(env);
#ifdef CPTSIM_SOURCE_PRESET_DIR
  dirs.push_back(CPTSIM_SOURCE_PRESET_DIR);
#endif
  const std::string file_name =
      name.size() > 4 && name.substr(name.size() - 4) == ".cfg" ? name
                                                                : name + ".cfg";
  for (const std::string& dir : dirs) {
    const fs::path candidate = fs::path(dir) / file_name;
    if (fs::exists(candidate)) return candidate.string();
  }
  std::string searched;
  for (const auto& d : dirs) searched += (searched.empty() ? "" : ", ") + d;
  throw std::invalid_argument("preset '" + name + "' not found (searched: " +
                           searched + ")");
}

std::string format_full(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

} // namespace cptsim
