#pragma once

// Random TLS ensembles following the Standard Tunneling Model.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tlsscope/errors.hpp"
#include "tlsscope/rng.hpp"
#include "tlsscope/stm.hpp"

namespace tlsscope {

/// Dipole projection distribution, a normal truncated to [min, max] (e*A).
struct DipoleDistribution {
  double mean = 0.4;
  double sd = 0.2;
  double min = 0.02;
  double max = 2.0;
};

struct EnsembleConfig {
  // Sample-dielectric population.
  double p0 = 1800.0;            // (um^3 GHz)^-1
  double volume_um3 = 2.25e-3;   // field-free dielectric volume
  double d_nm = 50.0;            // sets gamma_s = 2 p / d
  DipoleDistribution dipole;

  // Reference-bias energy band (GHz) and its extension on each side, so
  // TLS tuned into the band by the bias sweeps are present too.
  double band_lo = 5.5;
  double band_hi = 6.4;
  double margin_ghz = 0.0;

  // Lower cutoff of the 1/delta0 distribution. P0 counts TLS above it.
  double delta_min_ghz = 1.0;
  double gamma_p_max = 0.03;     // |gamma_p| ~ U[0, max], GHz/V
  double gamma_g_max = 0.03;     // |gamma_g| ~ U[0, max] for surface TLS
  double gamma1_tls = 0.0;       // 1/us
  double gamma2_tls = units::two_pi;

  // Background populations as spectral densities per GHz (per trace).
  double junction_density = 0.0;
  double surface_density = 0.0;
};

struct Ensemble {
  std::vector<TlsParams> tls_list;
  std::uint64_t seed = 0;
  double volume_density_target = 0.0;
  double dielectric_volume = 0.0;
};

namespace detail {

enum class Population : std::uint64_t { Sample = 1, Junction = 2, Surface = 3 };

inline TlsParams draw_tls(Engine& gen, const EnsembleConfig& cfg, Population pop) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lo = cfg.band_lo - cfg.margin_ghz;
  const double hi = cfg.band_hi + cfg.margin_ghz;
  const double energy = lo + (hi - lo) * unit(gen);
  // At fixed E the STM density P0/delta0 in (eps, delta0) becomes
  // dc / (1 - c^2) in c = |eps|/E, i.e. atanh(c) uniform. Delta0 >= delta_min.
  const double u_min = std::min(cfg.delta_min_ghz / energy, 1.0);
  const double c_max = std::sqrt(std::max(1.0 - u_min * u_min, 0.0));
  const double c = std::tanh(unit(gen) * std::atanh(std::min(c_max, 1.0 - 1e-15)));
  const double delta0 = energy * std::sqrt(std::max(1.0 - c * c, 1e-30));
  const double eps_sign = unit(gen) < 0.5 ? -1.0 : 1.0;
  const double eps_mag = c * energy;

  TlsParams t;
  t.delta0 = delta0;
  t.eps_i = eps_sign * eps_mag;
  t.gamma1_tls = cfg.gamma1_tls;
  t.gamma2_tls = cfg.gamma2_tls;
  t.p_parallel = truncated_normal(gen, cfg.dipole.mean, cfg.dipole.sd, cfg.dipole.min,
                                  cfg.dipole.max);
  // Orientation cosine; its sign fixes the sign of the field coupling.
  const double orientation = 2.0 * unit(gen) - 1.0;
  const double gp = cfg.gamma_p_max * (2.0 * unit(gen) - 1.0);
  const double gg = cfg.gamma_g_max * (2.0 * unit(gen) - 1.0);
  switch (pop) {
    case Population::Sample:
      t.location = Location::SampleDielectric;
      t.gamma_s = (orientation < 0 ? -1.0 : 1.0) * gamma_from_dipole(t.p_parallel, cfg.d_nm);
      t.gamma_p = gp;
      break;
    case Population::Junction:
      t.location = Location::Junction;
      t.gamma_p = gp;
      break;
    case Population::Surface:
      t.location = Location::SurfaceElectrode;
      t.gamma_g = gg;
      t.gamma_p = gp;
      break;
  }
  return t;
}

}  // namespace detail

/// Draws an ensemble: for each population the count is Poisson with mean
/// density * bandwidth (sample density = p0 * volume), reference energies are
/// uniform over the extended band, (eps_i, delta0) follow P ~ 1/delta0 on the
/// shell of constant E, and the dipole projection follows the truncated
/// normal. Deterministic in `seed`.
inline Ensemble generate_ensemble(const EnsembleConfig& cfg, std::uint64_t seed) {
  if (!(cfg.band_hi > cfg.band_lo)) throw InvalidBand("generate_ensemble: empty band");
  if (cfg.p0 < 0 || cfg.volume_um3 < 0 || cfg.junction_density < 0 || cfg.surface_density < 0)
    throw InvalidArgument("generate_ensemble: densities must be >= 0");
  if (cfg.margin_ghz < 0) throw InvalidArgument("generate_ensemble: margin must be >= 0");

  Ensemble ens;
  ens.seed = seed;
  ens.volume_density_target = cfg.p0;
  ens.dielectric_volume = cfg.volume_um3;
  const double width = cfg.band_hi - cfg.band_lo + 2.0 * cfg.margin_ghz;

  const std::pair<detail::Population, double> pops[] = {
      {detail::Population::Sample, cfg.p0 * cfg.volume_um3},
      {detail::Population::Junction, cfg.junction_density},
      {detail::Population::Surface, cfg.surface_density},
  };
  for (const auto& [pop, density] : pops) {
    const double mean = density * width;
    if (mean <= 0) continue;
    Engine count_gen = make_engine(seed, {static_cast<std::uint64_t>(pop), 0xC0C0});
    const int n = std::poisson_distribution<int>(mean)(count_gen);
    for (int i = 0; i < n; ++i) {
      Engine gen = make_engine(seed, {static_cast<std::uint64_t>(pop), std::uint64_t(i) + 1});
      ens.tls_list.push_back(detail::draw_tls(gen, cfg, pop));
    }
  }
  return ens;
}

/// Number of TLS of a given location with transition energy in [lo, hi) at
/// bias b.
inline std::size_t count_in_band(const Ensemble& ens, double lo, double hi, const BiasPoint& b,
                                 Location loc) {
  std::size_t n = 0;
  for (const auto& t : ens.tls_list) {
    if (t.location != loc) continue;
    const double e = transition_energy(t, b);
    if (e >= lo && e < hi) ++n;
  }
  return n;
}

}  // namespace tlsscope
