#pragma once

// Minimal "key = value [unit]" document reader shared by the atomic-constants
// data file and the run-configuration files.  Lines are `key = value` with
// optional unit suffix and '#' comments.  Frequencies given in cyclic units
// (hz/khz/mhz/ghz) are converted to angular frequency; fields and intensities
// are converted to SI base units.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cptsim {

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int column_)
      : std::runtime_error(msg), line(line_), column(column_) {}
};

// One parsed numeric value. `magnitude` is already converted to the
// internal unit system (angular frequency rad/s, tesla, W/m^2, C m, or
// dimensionless).  `unit` keeps the raw suffix for round-tripping.
struct Quantity {
  double magnitude = 0.0;
  std::string unit; // raw suffix as written, empty if none
};

class KeyValueDocument {
 public:
  // Parses the given text.  Throws ParseError with line/column on malformed
  // input.  Duplicate keys are rejected.
  static KeyValueDocument parse(const std::string& text);
  static KeyValueDocument parse_file(const std::string& path);

  bool has(const std::string& key) const;

  // Scalar accessors. `require_*` throw std::runtime_error naming the key.
  double require_number(const std::string& key) const;  // converted magnitude
  double number_or(const std::string& key, double fallback) const;
  std::string require_string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;

  // Comma-separated list of numbers with one trailing unit suffix, e.g.
  // "0, 0.5, 1.5, 3 uw_per_mm2".
  std::vector<double> require_number_list(const std::string& key) const;
  std::vector<double> number_list_or(const std::string& key,
                                     const std::vector<double>& fallback) const;

  // Raw (unparsed) right-hand side, for string-valued keys.
  const std::map<std::string, std::string>& entries() const { return raw_; }

  // Merge an override (e.g. from the environment): replaces or adds a key.
  void set(const std::string& key, const std::string& value);

  // All keys, sorted (map order) — used to reject unknown keys.
  std::vector<std::string> keys() const;

  // Canonical 'key = value' text (sorted keys), used for manifest hashing.
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> raw_;
  static Quantity parse_quantity(const std::string& value, const std::string& key);
  friend class RunConfig;
};

// Converts "value unit" to internal units.  Recognized suffixes:
//   hz, khz, mhz, ghz      -> angular frequency (rad/s)
//   ut, mt, t              -> tesla
//   uw_per_mm2, w_per_m2   -> W/m^2
//   coulomb_meter          -> C m
//   s, ms, us              -> seconds
//   (none)                 -> dimensionless
double convert_unit(double value, const std::string& unit, const std::string& context);

// FNV-1a 64-bit hash of a string, hex-encoded; used for run manifests.
std::string fnv1a_hex(const std::string& text);

} // namespace cptsim
