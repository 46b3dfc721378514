#pragma once

// Standard Tunneling Model: single-TLS types and formulas.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tlsscope/errors.hpp"
#include "tlsscope/units.hpp"

namespace tlsscope {

/// Where a TLS resides in the sensor circuit.
enum class Location {
  SampleDielectric,
  Junction,
  StrayJunction,
  SurfaceElectrode,
  Unclassified,
};

/// The three bias controls.
enum class Control { Piezo, Global, Sample };

inline constexpr Control all_controls[] = {Control::Piezo, Control::Global,
                                           Control::Sample};

inline std::string_view to_string(Location loc) {
  switch (loc) {
    case Location::SampleDielectric: return "sample";
    case Location::Junction: return "junction";
    case Location::StrayJunction: return "stray-junction";
    case Location::SurfaceElectrode: return "surface";
    case Location::Unclassified: return "unclassified";
  }
  return "unclassified";
}

inline std::optional<Location> location_from_string(std::string_view s) {
  if (s == "sample") return Location::SampleDielectric;
  if (s == "junction") return Location::Junction;
  if (s == "stray-junction") return Location::StrayJunction;
  if (s == "surface") return Location::SurfaceElectrode;
  if (s == "unclassified") return Location::Unclassified;
  return std::nullopt;
}

inline std::string_view to_string(Control c) {
  switch (c) {
    case Control::Piezo: return "piezo";
    case Control::Global: return "global";
    case Control::Sample: return "sample";
  }
  return "piezo";
}

inline std::optional<Control> control_from_string(std::string_view s) {
  if (s == "piezo") return Control::Piezo;
  if (s == "global") return Control::Global;
  if (s == "sample") return Control::Sample;
  return std::nullopt;
}

/// Parameters of one tunneling two-level system.
///
/// Energies in GHz, bias couplings in GHz per volt at the respective
/// electrode (cold end for the sample capacitor), dipole in e*Angstrom,
/// decay rates in 1/us. The dipole is stored as a magnitude; its
/// orientation relative to the sample field is carried by the sign of
/// gamma_s.
struct TlsParams {
  double delta0 = 1.0;
  double eps_i = 0.0;
  double gamma_p = 0.0;
  double gamma_g = 0.0;
  double gamma_s = 0.0;
  double p_parallel = 0.0;
  double gamma1_tls = 0.0;
  double gamma2_tls = units::two_pi;  // 2*pi * 1 MHz
  Location location = Location::Unclassified;

  bool operator==(const TlsParams&) const = default;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const {
    if (!(delta0 > 0.0)) throw InvalidArgument("TlsParams: delta0 must be > 0");
    if (!(gamma1_tls >= 0.0))
      throw InvalidArgument("TlsParams: gamma1_tls must be >= 0");
    if (!(gamma2_tls >= 0.5 * gamma1_tls))
      throw InvalidArgument("TlsParams: gamma2_tls must be >= gamma1_tls/2");
    if (!(p_parallel >= 0.0))
      throw InvalidArgument("TlsParams: p_parallel must be >= 0");
    if (location == Location::SampleDielectric && gamma_s == 0.0)
      throw InvalidArgument("TlsParams: sample-dielectric TLS needs gamma_s != 0");
    if (location == Location::Junction && (gamma_g != 0.0 || gamma_s != 0.0))
      throw InvalidArgument("TlsParams: junction TLS cannot couple to gate fields");
  }
};

inline constexpr double default_v_s_limit = 2.5e-3;  // V at the cold end

/// Control vector: piezo, global gate and sample-capacitor voltages plus
/// the qubit frequency setpoint (GHz).
struct BiasPoint {
  double v_p = 0.0;
  double v_g = 0.0;
  double v_s = 0.0;
  double qubit_freq = 0.0;

  bool operator==(const BiasPoint&) const = default;

  void validate(double v_s_limit = default_v_s_limit) const {
    if (std::abs(v_s) > v_s_limit)
      throw BiasLimitExceeded("BiasPoint: |v_s| = " + std::to_string(v_s) +
                              " V exceeds limit " + std::to_string(v_s_limit) +
                              " V");
  }
};

inline double bias_component(const BiasPoint& b, Control c) {
  switch (c) {
    case Control::Piezo: return b.v_p;
    case Control::Global: return b.v_g;
    case Control::Sample: return b.v_s;
  }
  return 0.0;
}

inline BiasPoint with_bias(BiasPoint b, Control c, double v) {
  switch (c) {
    case Control::Piezo: b.v_p = v; break;
    case Control::Global: b.v_g = v; break;
    case Control::Sample: b.v_s = v; break;
  }
  return b;
}

inline double coupling_to(const TlsParams& tls, Control c) {
  switch (c) {
    case Control::Piezo: return tls.gamma_p;
    case Control::Global: return tls.gamma_g;
    case Control::Sample: return tls.gamma_s;
  }
  return 0.0;
}

/// Geometry and circuit parameters of the sensor qubit.
struct SensorDesign {
  double d_nm = 50.0;          // dielectric thickness
  double area_um2 = 0.075;     // capacitor plate area
  double eps_r = 10.0;
  double c_tot_fF = 100.0;     // all capacitance shunting the junctions
  double f10_ghz = 6.2;        // plasma frequency, omega10 = 2*pi*f10
  double t1_qubit_us = 1.0;    // isolated-qubit T1

  bool operator==(const SensorDesign&) const = default;

  void validate() const {
    if (!(d_nm > 0 && area_um2 > 0 && eps_r > 0 && c_tot_fF > 0 &&
          f10_ghz > 0 && t1_qubit_us > 0))
      throw InvalidArgument("SensorDesign: all parameters must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Single-TLS formulas

/// Bias-dependent asymmetry energy (GHz), linear in the three controls.
inline double asymmetry(const TlsParams& tls, const BiasPoint& b) {
  return tls.eps_i + tls.gamma_g * b.v_g + tls.gamma_s * b.v_s +
         tls.gamma_p * b.v_p;
}

inline double transition_energy(double delta0, double eps) {
  return std::hypot(delta0, eps);
}

/// E = sqrt(delta0^2 + eps^2) in GHz.
inline double transition_energy(const TlsParams& tls, const BiasPoint& b) {
  return transition_energy(tls.delta0, asymmetry(tls, b));
}

/// delta0 / E, in (0, 1].
inline double matrix_element(const TlsParams& tls, const BiasPoint& b) {
  return tls.delta0 / transition_energy(tls, b);
}

/// Qubit-TLS coupling g = p_par * (delta0/E) * F / hbar for a qubit field
/// of rms amplitude `field_rms` (V/m). Returned as an ordinary frequency in
/// MHz (the angular rate is 2*pi times this).
inline double coupling_strength(const TlsParams& tls, double field_rms,
                                const BiasPoint& b) {
  if (field_rms < 0) throw InvalidArgument("coupling_strength: field_rms < 0");
  const double p_eff = tls.p_parallel * units::e_angstrom * matrix_element(tls, b);
  const double omega = p_eff * field_rms / units::hbar;  // rad/s
  return omega / units::two_pi / units::mhz;
}

/// Vacuum voltage fluctuation on the qubit island, sqrt(hbar*omega10 / 2C),
/// in microvolts.
inline double vacuum_voltage(const SensorDesign& design) {
  if (!(design.c_tot_fF > 0)) throw InvalidArgument("vacuum_voltage: c_tot <= 0");
  const double omega = units::two_pi * design.f10_ghz * units::ghz;
  const double c = design.c_tot_fF * units::femtofarad;
  return std::sqrt(units::hbar * omega / (2.0 * c)) / units::microvolt;
}

/// Dielectric thickness (nm) at which a dipole p_min reaches g*T1 = 1 for
/// the given vacuum voltage: d = p * T1 * V_rms / hbar.
inline double design_thickness(double p_min_eA, double t1_us, double v_rms_uV) {
  if (!(p_min_eA > 0 && t1_us > 0 && v_rms_uV > 0))
    throw InvalidArgument("design_thickness: arguments must be positive");
  const double d = p_min_eA * units::e_angstrom * t1_us * units::microsecond *
                   v_rms_uV * units::microvolt / units::hbar;
  return d / units::nm;
}

/// Parallel-plate sample capacitance eps0*eps_r*A/d in fF. Fringe fields are
/// not included.
inline double sample_capacitance(const SensorDesign& design) {
  if (!(design.d_nm > 0)) throw InvalidArgument("sample_capacitance: d <= 0");
  return units::vacuum_permittivity * design.eps_r * design.area_um2 * units::um2 /
         (design.d_nm * units::nm) / units::femtofarad;
}

/// rms qubit field inside the sample capacitor, V_rms / d, in V/m.
inline double sample_field_rms(const SensorDesign& design) {
  return vacuum_voltage(design) * units::microvolt / (design.d_nm * units::nm);
}

/// Non-fatal design diagnostics. Currently flags C_s/C_tot > 0.05.
inline std::vector<std::string> design_warnings(const SensorDesign& design) {
  std::vector<std::string> out;
  const double ratio = sample_capacitance(design) / design.c_tot_fF;
  if (ratio > 0.05)
    out.push_back("sample capacitance is " + std::to_string(ratio) +
                  " of C_tot (> 0.05); C_s << C_tot does not hold");
  return out;
}

/// Sample-field coupling from the dipole projection: gamma_s = 2 p / d,
/// in GHz per volt.
inline double gamma_from_dipole(double p_parallel_eA, double d_nm) {
  if (!(d_nm > 0)) throw InvalidArgument("gamma_from_dipole: d <= 0");
  const double joule_per_volt = 2.0 * p_parallel_eA * units::e_angstrom / (d_nm * units::nm);
  return joule_per_volt / units::joule_per_ghz;
}

/// Inverse of gamma_from_dipole: p = h * gamma_s * d / 2, in e*Angstrom.
inline double dipole_from_gamma(double gamma_s_ghz_per_v, double d_nm) {
  if (!(d_nm > 0)) throw InvalidArgument("dipole_from_gamma: d <= 0");
  const double p = gamma_s_ghz_per_v * units::joule_per_ghz * d_nm * units::nm / 2.0;
  return p / units::e_angstrom;
}

/// Smallest dipole (e*Angstrom) whose coupling at field F reaches 1/T1.
inline double min_detectable_dipole(double field_rms, double t1_us) {
  if (!(field_rms > 0 && t1_us > 0))
    throw InvalidArgument("min_detectable_dipole: arguments must be positive");
  return units::hbar / (field_rms * t1_us * units::microsecond) / units::e_angstrom;
}

}  // namespace tlsscope
