#pragma once

// Physical quantities derived from fitted TLS: densities, loss tangent,
// relaxation budget, material report.

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tlsscope/errors.hpp"
#include "tlsscope/stm.hpp"
#include "tlsscope/units.hpp"

namespace tlsscope {

/// P0 = spectral density / volume, in (um^3 GHz)^-1.
inline double volume_density(double spectral_density_per_ghz, double volume_um3) {
  if (!(volume_um3 > 0)) throw InvalidArgument("volume_density: volume must be > 0");
  if (spectral_density_per_ghz < 0) throw InvalidArgument("volume_density: negative density");
  return spectral_density_per_ghz / volume_um3;
}

/// tan(delta0) = pi P0 p^2 / (3 eps0 eps_r), with P0 in (um^3 GHz)^-1 and p
/// in e*Angstrom; evaluated in SI units.
inline double loss_tangent(double p0, double p_parallel_eA, double eps_r) {
  if (!(p0 > 0 && p_parallel_eA > 0 && eps_r > 0))
    throw InvalidArgument("loss_tangent: arguments must be positive");
  const double p0_si = p0 / (units::um3 * units::joule_per_ghz);  // J^-1 m^-3
  const double p = p_parallel_eA * units::e_angstrom;
  return units::pi * p0_si * p * p / (3.0 * units::vacuum_permittivity * eps_r);
}

/// Participation ratio of the sample capacitor, C_s / (C_s + C).
inline double participation_ratio(const SensorDesign& design) {
  const double cs = sample_capacitance(design);
  return cs / (cs + design.c_tot_fF);
}

struct RelaxationBudget {
  double participation = 0.0;
  double gamma_dielectric = 0.0;  // 1/us
  double gamma1 = 0.0;            // 1/us
  bool dielectric_limited = false;
};

/// Gamma1 = 2 pi f01 p_s tan(delta0) + Gamma_1,0, all rates in 1/us.
inline RelaxationBudget relaxation_budget(const SensorDesign& design, double tan_delta0,
                                          double gamma_background) {
  design.validate();
  if (tan_delta0 < 0 || gamma_background < 0)
    throw InvalidArgument("relaxation_budget: tan_delta0 and background rate must be >= 0");
  if (!(design.c_tot_fF > sample_capacitance(design)))
    throw InvalidArgument("relaxation_budget: C_tot must exceed the sample capacitance");
  RelaxationBudget b;
  b.participation = participation_ratio(design);
  b.gamma_dielectric = units::two_pi * design.f10_ghz * 1e3 * b.participation * tan_delta0;
  b.gamma1 = b.gamma_dielectric + gamma_background;
  b.dielectric_limited = b.gamma_dielectric > gamma_background;
  return b;
}

/// Dielectric volume away from edges open to air: the film's width loses a
/// rim of `rim_nm` (default d) on both sides. Lengths in um, d in nm.
inline double field_free_volume(double width_um, double length_um, double d_nm, double rim_nm = -1) {
  if (!(width_um > 0 && length_um > 0 && d_nm > 0))
    throw InvalidArgument("field_free_volume: dimensions must be positive");
  if (rim_nm < 0) rim_nm = d_nm;
  const double w = width_um - 2.0 * rim_nm * 1e-3;
  if (!(w > 0)) throw InvalidArgument("field_free_volume: rim consumes the whole width");
  return w * length_um * d_nm * 1e-3;
}

struct MaterialAssumptions {
  double dielectric_volume_um3 = 2.25e-3;
  double eps_r = 10.0;
  double d_nm = 50.0;
  double field_sample = 90.0;    // V/m
  double field_junction = 15.0;  // V/m
  double t1_us = 1.0;
};

struct MaterialReport {
  double p_parallel_mean = 0.0;
  double p_parallel_std = 0.0;
  std::map<Location, double> spectral_density;          // 1/GHz, raw
  std::map<Location, double> spectral_density_cut;      // above the detectability cut
  double p0 = 0.0;
  double p0_cut = 0.0;
  double tan_delta0 = 0.0;
  std::size_t n_tls_total = 0;
  std::size_t n_dipoles = 0;
  double min_detectable_dipole_sample = 0.0;
  double min_detectable_dipole_junction = 0.0;
  MaterialAssumptions assumptions;
};

struct DipoleSample {
  Location location = Location::Unclassified;
  double p_parallel = 0.0;   // e*Angstrom; NaN if unknown
  double density = 0.0;      // contribution to its class density, 1/GHz
};

/// Derives the material report from per-TLS results. Cut-corrected densities
/// drop TLS whose dipole lies below the minimum detectable dipole of the
/// weakest-field location (junction), so that classes can be compared at a
/// common sensitivity; they are reported next to the raw numbers.
inline MaterialReport material_report(const std::vector<DipoleSample>& tls, const MaterialAssumptions& a) {
  MaterialReport r;
  r.assumptions = a;
  r.n_tls_total = tls.size();
  r.min_detectable_dipole_sample = min_detectable_dipole(a.field_sample, a.t1_us);
  r.min_detectable_dipole_junction = min_detectable_dipole(a.field_junction, a.t1_us);
  double sum = 0, sum2 = 0;
  for (const auto& t : tls) {
    r.spectral_density[t.location] += t.density;
    if (t.location == Location::SampleDielectric && std::isfinite(t.p_parallel)) {
      sum += t.p_parallel;
      sum2 += t.p_parallel * t.p_parallel;
      ++r.n_dipoles;
      if (t.p_parallel >= r.min_detectable_dipole_junction) r.spectral_density_cut[t.location] += t.density;
    } else if (t.location != Location::SampleDielectric) {
      r.spectral_density_cut[t.location] += t.density;
    }
  }
  if (r.n_dipoles > 0) {
    r.p_parallel_mean = sum / double(r.n_dipoles);
    r.p_parallel_std = r.n_dipoles > 1
                           ? std::sqrt(std::max(0.0, (sum2 - sum * r.p_parallel_mean) / double(r.n_dipoles - 1)))
                           : 0.0;
  }
  const double sample_density =
      r.spectral_density.count(Location::SampleDielectric) ? r.spectral_density.at(Location::SampleDielectric) : 0.0;
  const double sample_cut = r.spectral_density_cut.count(Location::SampleDielectric)
                                ? r.spectral_density_cut.at(Location::SampleDielectric)
                                : 0.0;
  r.p0 = volume_density(sample_density, a.dielectric_volume_um3);
  r.p0_cut = volume_density(sample_cut, a.dielectric_volume_um3);
  if (r.p0 > 0 && r.p_parallel_mean > 0) r.tan_delta0 = loss_tangent(r.p0, r.p_parallel_mean, a.eps_r);
  return r;
}

inline nlohmann::json to_json(const MaterialReport& r) {
  nlohmann::json dens = nlohmann::json::object(), cut = nlohmann::json::object();
  for (const auto& [loc, v] : r.spectral_density) dens[std::string(to_string(loc))] = v;
  for (const auto& [loc, v] : r.spectral_density_cut) cut[std::string(to_string(loc))] = v;
  return {{"p_parallel_mean_eA", r.p_parallel_mean},
          {"p_parallel_std_eA", r.p_parallel_std},
          {"spectral_density_per_GHz", dens},
          {"spectral_density_cut_per_GHz", cut},
          {"P0_per_um3_GHz", r.p0},
          {"P0_cut_per_um3_GHz", r.p0_cut},
          {"tan_delta0", r.tan_delta0},
          {"n_tls_total", r.n_tls_total},
          {"n_dipoles", r.n_dipoles},
          {"min_detectable_dipole_eA", {{"sample", r.min_detectable_dipole_sample},
                                        {"junction", r.min_detectable_dipole_junction}}},
          {"assumptions", {{"dielectric_volume_um3", r.assumptions.dielectric_volume_um3},
                           {"eps_r", r.assumptions.eps_r},
                           {"d_nm", r.assumptions.d_nm},
                           {"field_sample_V_per_m", r.assumptions.field_sample},
                           {"field_junction_V_per_m", r.assumptions.field_junction},
                           {"t1_us", r.assumptions.t1_us}}}};
}

inline std::string to_text(const MaterialReport& r) {
  std::string out;
  char buf[160];
  auto line = [&](const char* name, double v, const char* unit) {
    std::snprintf(buf, sizeof buf, "%-34s %14.6g  %s\n", name, v, unit);
    out += buf;
  };
  out += "material report\n";
  line("TLS found", double(r.n_tls_total), "");
  line("sample TLS with dipole", double(r.n_dipoles), "");
  line("mean p_parallel", r.p_parallel_mean, "e*A");
  line("std p_parallel", r.p_parallel_std, "e*A");
  for (const auto& [loc, v] : r.spectral_density) {
    const std::string name = "spectral density (" + std::string(to_string(loc)) + ")";
    line(name.c_str(), v, "1/GHz");
  }
  line("P0", r.p0, "1/(um^3 GHz)");
  line("P0 above junction cut", r.p0_cut, "1/(um^3 GHz)");
  line("tan delta0", r.tan_delta0, "");
  line("min detectable dipole (sample)", r.min_detectable_dipole_sample, "e*A");
  line("min detectable dipole (junction)", r.min_detectable_dipole_junction, "e*A");
  line("dielectric volume", r.assumptions.dielectric_volume_um3, "um^3");
  line("eps_r", r.assumptions.eps_r, "");
  line("d", r.assumptions.d_nm, "nm");
  return out;
}

}  // namespace tlsscope
