#pragma once

// Run configuration for the CLI: a flat "key = value [unit]" document with
// strict unknown-key rejection, environment-variable overrides, and a
// canonical manifest (text + hash) for reproducibility.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cptsim/datafile.hpp"
#include "cptsim/scan.hpp"

namespace cptsim {

struct SweepCurve {
  PolarizationScheme scheme;
  int tuned_f_prime = 4;
  int mg = 0, me = 0;       // resonance followed by the sweep
  std::string label;        // e.g. "sigma_minus/4/0:0"
};

struct RunConfig {
  ScanConfig scan;

  // sweep.* (used by the `sweep` subcommand)
  enum class SweepKind { intensity, trap };
  SweepKind sweep_kind = SweepKind::intensity;
  std::vector<double> sweep_intensities; // W/m^2 per sideband
  std::vector<SweepCurve> sweep_curves;  // empty -> single curve from scan config

  // lineshape.* (used by the `lineshape` subcommand)
  int lineshape_g = 3;  // 1-based ground level indices
  int lineshape_e = 13;

  uint64_t seed = 1;
  std::string data_file; // empty -> default_data_file()

  // Canonicalized resolved document (after env overrides) and its hash.
  std::string manifest_text;
  std::string manifest_hash;

  // Parses text, applies CPTSIM_* environment overrides, rejects unknown
  // keys.  Throws ParseError (with line/column) or std::runtime_error with
  // the offending key.
  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
};

// Environment override name for a config key: dots become double
// underscores, uppercased, prefixed CPTSIM_ (e.g. cell.gamma_p ->
// CPTSIM_CELL__GAMMA_P).
std::string env_name_for_key(const std::string& key);

// Locates a named preset file: $CPTSIM_PRESET_DIR, else the source-tree
// presets directory.  Throws if not found.
std::string find_preset(const std::string& name);

// Full-precision (17 significant digits) decimal formatting for CSV output.
std::string format_full(double value);

} // namespace cptsim
