#pragma once

// Fundamental physical constants (SI, CODATA 2018 / exact SI definitions).
// Atomic structure data (hyperfine splittings, g-factors, dipole matrix
// elements) is deliberately *not* here: it is loaded from the bundled
// plain-text data file so that provenance is visible and editable.

namespace cptsim::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double planck_h = 6.62607015e-34;        // J s (exact)
inline constexpr double hbar = planck_h / two_pi;         // J s
inline constexpr double speed_of_light = 299792458.0;     // m/s (exact)
inline constexpr double epsilon0 = 8.8541878128e-12;      // F/m
inline constexpr double bohr_magneton = 9.2740100783e-24; // J/T

} // namespace cptsim::constants
