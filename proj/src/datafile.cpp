#include "cptsim/datafile.hpp"

#include "cptsim/constants.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cptsim {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool looks_numeric(const std::string& tok) {
  if (tok.empty()) return false;
  char* end = nullptr;
  std::strtod(tok.c_str(), &end);
  return end == tok.c_str() + tok.size();
}

// Splits an RHS into numeric tokens plus an optional trailing unit suffix.
// Commas act as separators.  Returns false if any non-trailing token is
// non-numeric (i.e. the value is a plain string).
bool split_numbers(const std::string& rhs, std::vector<double>* numbers,
                   std::string* unit) {
  std::string cleaned = rhs;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  if (tokens.empty()) return false;
  unit->clear();
  if (!looks_numeric(tokens.back())) {
    if (tokens.size() == 1) return false;
    *unit = tokens.back();
    tokens.pop_back();
  }
  numbers->clear();
  for (const auto& t : tokens) {
    if (!looks_numeric(t)) return false;
    numbers->push_back(std::strtod(t.c_str(), nullptr));
  }
  return true;
}

} // namespace

double convert_unit(double value, const std::string& unit_in,
                    const std::string& context) {
  const std::string unit = lower(unit_in);
  using namespace constants;
  // Frequencies given in cyclic units enter the model as angular frequencies.
  if (unit == "hz") return value * two_pi;
  if (unit == "khz") return value * two_pi * 1e3;
  if (unit == "mhz") return value * two_pi * 1e6;
  if (unit == "ghz") return value * two_pi * 1e9;
  if (unit == "rad_per_s") return value;
  if (unit == "ut") return value * 1e-6;
  if (unit == "mt") return value * 1e-3;
  if (unit == "t") return value;
  if (unit == "uw_per_mm2") return value; // 1 uW/mm^2 == 1 W/m^2 numerically
  if (unit == "w_per_m2") return value;
  if (unit == "coulomb_meter") return value;
  if (unit == "s") return value;
  if (unit == "ms") return value * 1e-3;
  if (unit == "us") return value * 1e-6;
  if (unit.empty() || unit == "none") return value;
  throw std::invalid_argument("unknown unit '" + unit_in + "' for " + context);
}

Quantity KeyValueDocument::parse_quantity(const std::string& value,
                                          const std::string& key) {
  std::vector<double> numbers;
  std::string unit;
  if (!split_numbers(value, &numbers, &unit) || numbers.size() != 1) {
    throw std::invalid_argument("key '" + key + "' must be a single number, got '" +
                             value + "'");
  }
  Quantity q;
  q.unit = unit;
  q.magnitude = convert_unit(numbers[0], unit, key);
  return q;
}

KeyValueDocument KeyValueDocument::parse(const std::string& text) {
  KeyValueDocument doc;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value', got '" + line + "'", line_no, 1);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string rhs = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no, 1);
    if (rhs.empty()) {
      throw ParseError("empty value for key '" + key + "'", line_no,
                       static_cast<int>(eq) + 2);
    }
    for (char c : key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
            c == '-')) {
        throw ParseError("invalid character '" + std::string(1, c) +
                             "' in key '" + key + "'",
                         line_no, 1);
      }
    }
    if (doc.raw_.count(key)) {
      throw ParseError("duplicate key '" + key + "'", line_no, 1);
    }
    doc.raw_.emplace(key, rhs);
  }
  return doc;
}

KeyValueDocument KeyValueDocument::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line, e.column);
  }
}

bool KeyValueDocument::has(const std::string& key) const {
  return raw_.count(key) != 0;
}

double KeyValueDocument::require_number(const std::string& key) const {
  auto it = raw_.find(key);
  if (it == raw_.end()) {
    throw std::invalid_argument("missing required key '" + key + "'");
  }
  return parse_quantity(it->second, key).magnitude;
}

double KeyValueDocument::number_or(const std::string& key, double fallback) const {
  return has(key) ? require_number(key) : fallback;
}

std::string KeyValueDocument::require_string(const std::string& key) const {
  auto it = raw_.find(key);
  if (it == raw_.end()) {
    throw std::invalid_argument("missing required key '" + key + "'");
  }
  return it->second;
}

std::string KeyValueDocument::string_or(const std::string& key,
                                        const std::string& fallback) const {
  auto it = raw_.find(key);
  return it == raw_.end() ? fallback : it->second;
}

bool KeyValueDocument::bool_or(const std::string& key, bool fallback) const {
  auto it = raw_.find(key);
  if (it == raw_.end()) return fallback;
  const std::string v = lower(trim(it->second));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw std::invalid_argument("key '" + key + "' must be a boolean, got '" +
                           it->second + "'");
}

std::vector<double> KeyValueDocument::require_number_list(const std::string& key) const {
  auto it = raw_.find(key);
  if (it == raw_.end()) {
    throw std::invalid_argument("missing required key '" + key + "'");
  }
  std::vector<double> numbers;
  std::string unit;
  if (!split_numbers(it->second, &numbers, &unit) || numbers.empty()) {
    throw std::invalid_argument("key '" + key + "' must be a list of numbers, got '" +
                             it->second + "'");
  }
  for (double& v : numbers) v = convert_unit(v, unit, key);
  return numbers;
}

std::vector<double> KeyValueDocument::number_list_or(
    const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? require_number_list(key) : fallback;
}

void KeyValueDocument::set(const std::string& key, const std::string& value) {
  raw_[key] = trim(value);
}

std::vector<std::string> KeyValueDocument::keys() const {
  std::vector<std::string> out;
  out.reserve(raw_.size());
  for (const auto& [k, v] : raw_) out.push_back(k);
  return out;
}

std::string KeyValueDocument::canonical_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : raw_) out << k << " = " << v << '\n';
  return out.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

} // namespace cptsim
