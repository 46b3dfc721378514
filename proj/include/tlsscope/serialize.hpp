#pragma once

// JSON mapping of the library types. Readers reject unknown keys.

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tlsscope/coupled.hpp"
#include "tlsscope/dataset.hpp"
#include "tlsscope/ensemble.hpp"
#include "tlsscope/errors.hpp"
#include "tlsscope/stm.hpp"

namespace tlsscope {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

/// Throws ConfigError if `j` is not an object or holds a key outside `allowed`.
inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                       std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

/// Throws SchemaError for a missing or newer schema_version.
inline void check_schema(const json& j, std::string_view where) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw SchemaError(std::string(where) + ": missing schema_version");
  const auto& v = j.at("schema_version");
  if (!v.is_number_integer()) throw SchemaError(std::string(where) + ": schema_version must be an integer");
  const int version = v.get<int>();
  if (version > schema_version)
    throw SchemaError(std::string(where) + ": schema_version " + std::to_string(version) +
                      " is newer than supported version " + std::to_string(schema_version));
  if (version < 1) throw SchemaError(std::string(where) + ": invalid schema_version");
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

inline Location parse_location(const std::string& s) {
  if (auto l = location_from_string(s)) return *l;
  throw ConfigError("unknown location '" + s + "'");
}

inline Control parse_control(const std::string& s) {
  if (auto c = control_from_string(s)) return *c;
  throw ConfigError("unknown control '" + s + "'");
}

inline json to_json(const TlsParams& t) {
  return {{"delta0_GHz", t.delta0},       {"eps_i_GHz", t.eps_i},
          {"gamma_p", t.gamma_p},         {"gamma_g", t.gamma_g},
          {"gamma_s", t.gamma_s},         {"p_parallel_eA", t.p_parallel},
          {"gamma1_tls", t.gamma1_tls},   {"gamma2_tls", t.gamma2_tls},
          {"location", std::string(to_string(t.location))}};
}

inline TlsParams tls_from_json(const json& j) {
  check_keys(j, {"delta0_GHz", "eps_i_GHz", "gamma_p", "gamma_g", "gamma_s", "p_parallel_eA",
                 "gamma1_tls", "gamma2_tls", "location"},
             "tls");
  TlsParams t;
  read_opt(j, "delta0_GHz", t.delta0);
  read_opt(j, "eps_i_GHz", t.eps_i);
  read_opt(j, "gamma_p", t.gamma_p);
  read_opt(j, "gamma_g", t.gamma_g);
  read_opt(j, "gamma_s", t.gamma_s);
  read_opt(j, "p_parallel_eA", t.p_parallel);
  read_opt(j, "gamma1_tls", t.gamma1_tls);
  read_opt(j, "gamma2_tls", t.gamma2_tls);
  std::string loc = "unclassified";
  read_opt(j, "location", loc);
  t.location = parse_location(loc);
  try {
    t.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

inline json to_json(const SensorDesign& d) {
  return {{"d_nm", d.d_nm},         {"area_um2", d.area_um2},       {"eps_r", d.eps_r},
          {"c_tot_fF", d.c_tot_fF}, {"f10_GHz", d.f10_ghz},         {"t1_qubit_us", d.t1_qubit_us}};
}

inline SensorDesign design_from_json(const json& j) {
  check_keys(j, {"d_nm", "area_um2", "eps_r", "c_tot_fF", "f10_GHz", "t1_qubit_us"}, "design");
  SensorDesign d;
  read_opt(j, "d_nm", d.d_nm);
  read_opt(j, "area_um2", d.area_um2);
  read_opt(j, "eps_r", d.eps_r);
  read_opt(j, "c_tot_fF", d.c_tot_fF);
  read_opt(j, "f10_GHz", d.f10_ghz);
  read_opt(j, "t1_qubit_us", d.t1_qubit_us);
  return d;
}

inline json to_json(const QubitModel& q) {
  return {{"design", to_json(q.design)},
          {"gamma10", q.gamma10},
          {"field_junction_V_per_m", q.field_junction},
          {"field_surface_V_per_m", q.field_surface},
          {"dielectric_volume_um3", q.dielectric_volume_um3}};
}

inline QubitModel qubit_from_json(const json& j) {
  check_keys(j, {"design", "gamma10", "field_junction_V_per_m", "field_surface_V_per_m",
                 "dielectric_volume_um3"},
             "qubit");
  QubitModel q;
  if (j.contains("design")) q.design = design_from_json(j.at("design"));
  read_opt(j, "gamma10", q.gamma10);
  read_opt(j, "field_junction_V_per_m", q.field_junction);
  read_opt(j, "field_surface_V_per_m", q.field_surface);
  read_opt(j, "dielectric_volume_um3", q.dielectric_volume_um3);
  return q;
}

inline json to_json(const ControlChain& c) {
  return {{"division_factor", c.division_factor}, {"v_s_limit_V", c.v_s_limit}};
}

inline ControlChain chain_from_json(const json& j) {
  check_keys(j, {"division_factor", "v_s_limit_V"}, "chain");
  ControlChain c;
  read_opt(j, "division_factor", c.division_factor);
  read_opt(j, "v_s_limit_V", c.v_s_limit);
  return c;
}

inline json to_json(const BiasPoint& b) {
  return {{"v_p", b.v_p}, {"v_g", b.v_g}, {"v_s", b.v_s}};
}

inline BiasPoint bias_from_json(const json& j) {
  check_keys(j, {"v_p", "v_g", "v_s"}, "bias");
  BiasPoint b;
  read_opt(j, "v_p", b.v_p);
  read_opt(j, "v_g", b.v_g);
  read_opt(j, "v_s", b.v_s);
  return b;
}

inline json to_json(const CoupledPair& p) {
  return {{"tls1", to_json(p.tls1)},
          {"tls2", to_json(p.tls2)},
          {"basis", p.basis == CouplingBasis::Localized ? "localized" : "eigenbasis"},
          {"g_z_MHz", p.g_z},
          {"g_x_MHz", p.g_x}};
}

inline CoupledPair pair_from_json(const json& j) {
  check_keys(j, {"tls1", "tls2", "basis", "g_z_MHz", "g_x_MHz"}, "pair");
  if (!j.contains("tls1") || !j.contains("tls2")) throw ConfigError("pair: tls1 and tls2 required");
  CoupledPair p;
  p.tls1 = tls_from_json(j.at("tls1"));
  p.tls2 = tls_from_json(j.at("tls2"));
  std::string basis = "localized";
  read_opt(j, "basis", basis);
  if (basis == "localized") p.basis = CouplingBasis::Localized;
  else if (basis == "eigenbasis") p.basis = CouplingBasis::Eigenbasis;
  else throw ConfigError("pair: basis must be 'localized' or 'eigenbasis'");
  read_opt(j, "g_z_MHz", p.g_z);
  read_opt(j, "g_x_MHz", p.g_x);
  return p;
}

inline json to_json(const DipoleDistribution& d) {
  return {{"mean_eA", d.mean}, {"sd_eA", d.sd}, {"min_eA", d.min}, {"max_eA", d.max}};
}

inline DipoleDistribution dipole_from_json(const json& j) {
  check_keys(j, {"mean_eA", "sd_eA", "min_eA", "max_eA"}, "dipole");
  DipoleDistribution d;
  read_opt(j, "mean_eA", d.mean);
  read_opt(j, "sd_eA", d.sd);
  read_opt(j, "min_eA", d.min);
  read_opt(j, "max_eA", d.max);
  return d;
}

inline json to_json(const EnsembleConfig& c) {
  return {{"p0", c.p0},
          {"volume_um3", c.volume_um3},
          {"d_nm", c.d_nm},
          {"dipole", to_json(c.dipole)},
          {"band_lo_GHz", c.band_lo},
          {"band_hi_GHz", c.band_hi},
          {"margin_GHz", c.margin_ghz},
          {"delta_min_GHz", c.delta_min_ghz},
          {"gamma_p_max", c.gamma_p_max},
          {"gamma_g_max", c.gamma_g_max},
          {"gamma1_tls", c.gamma1_tls},
          {"gamma2_tls", c.gamma2_tls},
          {"junction_density_per_GHz", c.junction_density},
          {"surface_density_per_GHz", c.surface_density}};
}

inline EnsembleConfig ensemble_config_from_json(const json& j) {
  check_keys(j, {"p0", "volume_um3", "d_nm", "dipole", "band_lo_GHz", "band_hi_GHz", "margin_GHz",
                 "delta_min_GHz", "gamma_p_max", "gamma_g_max", "gamma1_tls", "gamma2_tls",
                 "junction_density_per_GHz", "surface_density_per_GHz"},
             "ensemble");
  EnsembleConfig c;
  read_opt(j, "p0", c.p0);
  read_opt(j, "volume_um3", c.volume_um3);
  read_opt(j, "d_nm", c.d_nm);
  if (j.contains("dipole")) c.dipole = dipole_from_json(j.at("dipole"));
  read_opt(j, "band_lo_GHz", c.band_lo);
  read_opt(j, "band_hi_GHz", c.band_hi);
  read_opt(j, "margin_GHz", c.margin_ghz);
  read_opt(j, "delta_min_GHz", c.delta_min_ghz);
  read_opt(j, "gamma_p_max", c.gamma_p_max);
  read_opt(j, "gamma_g_max", c.gamma_g_max);
  read_opt(j, "gamma1_tls", c.gamma1_tls);
  read_opt(j, "gamma2_tls", c.gamma2_tls);
  read_opt(j, "junction_density_per_GHz", c.junction_density);
  read_opt(j, "surface_density_per_GHz", c.surface_density);
  return c;
}

inline json to_json(const LayoutConfig& c) {
  return {{"pattern", c.pattern},
          {"n_segments", c.n_segments},
          {"steps_per_segment", c.steps_per_segment},
          {"vg_start_V", c.vg_start},
          {"vg_stop_V", c.vg_stop},
          {"vp_start_V", c.vp_start},
          {"vp_stop_V", c.vp_stop},
          {"vs_amplitude_V", c.vs_amplitude}};
}

inline LayoutConfig layout_from_json(const json& j) {
  check_keys(j, {"pattern", "n_segments", "steps_per_segment", "vg_start_V", "vg_stop_V",
                 "vp_start_V", "vp_stop_V", "vs_amplitude_V"},
             "layout");
  LayoutConfig c;
  read_opt(j, "pattern", c.pattern);
  read_opt(j, "n_segments", c.n_segments);
  read_opt(j, "steps_per_segment", c.steps_per_segment);
  read_opt(j, "vg_start_V", c.vg_start);
  read_opt(j, "vg_stop_V", c.vg_stop);
  read_opt(j, "vp_start_V", c.vp_start);
  read_opt(j, "vp_stop_V", c.vp_stop);
  read_opt(j, "vs_amplitude_V", c.vs_amplitude);
  return c;
}

}  // namespace tlsscope
