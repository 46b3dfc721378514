#pragma once

// Physical constants and unit conversions.
//
// Internal conventions:
//   energies      GHz (E/h)
//   rates g, Gamma ordinary frequencies; g in MHz, decay rates in 1/us
//   voltages      V
//   dipoles       e*Angstrom
//   lengths       nm for thicknesses, um for areas/volumes
// Angular factors (2*pi) appear only where a Hamiltonian or a Lorentzian
// is assembled.

#include <numbers>

namespace tlsscope::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 (exact where the SI fixes them).
inline constexpr double planck_h = 6.62607015e-34;            // J s
inline constexpr double hbar = planck_h / two_pi;             // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m

inline constexpr double angstrom = 1e-10;  // m
inline constexpr double nm = 1e-9;         // m
inline constexpr double um = 1e-6;         // m
inline constexpr double um2 = 1e-12;       // m^2
inline constexpr double um3 = 1e-18;       // m^3
inline constexpr double femtofarad = 1e-15;
inline constexpr double microvolt = 1e-6;
inline constexpr double microsecond = 1e-6;
inline constexpr double ghz = 1e9;
inline constexpr double mhz = 1e6;

/// One e*Angstrom in C*m.
inline constexpr double e_angstrom = elementary_charge * angstrom;

/// Energy of one GHz photon in joules (h * 1 GHz).
inline constexpr double joule_per_ghz = planck_h * ghz;

constexpr double ghz_to_mhz(double f) { return f * 1e3; }
constexpr double mhz_to_ghz(double f) { return f * 1e-3; }

/// Ordinary frequency in MHz -> angular rate in rad/us.
constexpr double mhz_to_rad_per_us(double f) { return two_pi * f; }

/// Ordinary frequency in GHz -> angular rate in rad/us.
constexpr double ghz_to_rad_per_us(double f) { return two_pi * f * 1e3; }

}  // namespace tlsscope::units
