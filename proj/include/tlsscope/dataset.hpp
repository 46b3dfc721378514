#pragma once

// Swap-spectroscopy datasets: segment layout, control chain, and the
// synthetic T1 map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tlsscope/coupled.hpp"
#include "tlsscope/ensemble.hpp"
#include "tlsscope/errors.hpp"
#include "tlsscope/parallel.hpp"
#include "tlsscope/rng.hpp"
#include "tlsscope/stm.hpp"

namespace tlsscope {

inline constexpr int dataset_schema_version = 1;

/// Warm-to-cold attenuation of the sample-capacitor bias line.
struct ControlChain {
  double division_factor = 205.0;
  double v_s_limit = default_v_s_limit;

  void validate() const {
    if (!(division_factor > 0)) throw InvalidArgument("ControlChain: division_factor must be > 0");
    if (!(v_s_limit > 0)) throw InvalidArgument("ControlChain: v_s_limit must be > 0");
  }
};

/// Cold-end sample voltage for a source voltage. Throws BiasLimitExceeded
/// when the result would exceed the chain's safety limit.
inline double apply_control_chain(double v_source, const ControlChain& chain) {
  chain.validate();
  const double v_s = v_source / chain.division_factor;
  if (std::abs(v_s) > chain.v_s_limit * (1.0 + 1e-12))
    throw BiasLimitExceeded("cold-end sample voltage " + std::to_string(v_s) +
                            " V exceeds limit " + std::to_string(chain.v_s_limit) + " V");
  return v_s;
}

enum class Direction { Up, Down };

inline std::string_view to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

/// One bias sweep: a single control ramps through `bias_values` while the
/// other controls stay at `base`.
struct Segment {
  Control control = Control::Sample;
  Direction direction = Direction::Up;
  BiasPoint base;
  std::vector<double> bias_values;

  std::size_t steps() const { return bias_values.size(); }
  BiasPoint bias_at(std::size_t step) const { return with_bias(base, control, bias_values[step]); }
};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

inline Segment make_segment(Control c, const BiasPoint& base, double from, double to, std::size_t steps) {
  Segment s;
  s.control = c;
  s.direction = to >= from ? Direction::Up : Direction::Down;
  s.base = with_bias(base, c, 0.0);
  s.bias_values = linspace(from, to, steps);
  return s;
}

/// Interleaved layout: sample ramps alternate direction between +-amplitude,
/// the gate and piezo voltages are stepped down monotonically in their own
/// segments. `pattern` lists the controls in order, e.g. "SGSP".
struct LayoutConfig {
  std::string pattern = "SGSP";
  int n_segments = 8;
  std::size_t steps_per_segment = 60;
  double vg_start = 90.0, vg_stop = -30.0;
  double vp_start = 90.0, vp_stop = -30.0;
  double vs_amplitude = 2.4e-3;  // cold end
};

inline std::vector<Segment> alternating_layout(const LayoutConfig& cfg) {
  if (cfg.pattern.empty() || cfg.n_segments <= 0 || cfg.steps_per_segment < 2)
    throw InvalidArgument("alternating_layout: empty layout");
  int n_g = 0, n_p = 0;
  for (int i = 0; i < cfg.n_segments; ++i) {
    const char c = cfg.pattern[std::size_t(i) % cfg.pattern.size()];
    if (c == 'G') ++n_g;
    else if (c == 'P') ++n_p;
    else if (c != 'S') throw InvalidArgument("alternating_layout: pattern uses S, G, P");
  }
  const double dg = n_g > 0 ? (cfg.vg_stop - cfg.vg_start) / n_g : 0.0;
  const double dp = n_p > 0 ? (cfg.vp_stop - cfg.vp_start) / n_p : 0.0;
  BiasPoint state{cfg.vp_start, cfg.vg_start, -cfg.vs_amplitude, 0.0};
  std::vector<Segment> out;
  for (int i = 0; i < cfg.n_segments; ++i) {
    const char c = cfg.pattern[std::size_t(i) % cfg.pattern.size()];
    if (c == 'S') {
      out.push_back(make_segment(Control::Sample, state, state.v_s, -state.v_s, cfg.steps_per_segment));
      state.v_s = -state.v_s;
    } else if (c == 'G') {
      out.push_back(make_segment(Control::Global, state, state.v_g, state.v_g + dg, cfg.steps_per_segment));
      state.v_g += dg;
    } else {
      out.push_back(make_segment(Control::Piezo, state, state.v_p, state.v_p + dp, cfg.steps_per_segment));
      state.v_p += dp;
    }
  }
  return out;
}

/// Qubit side of the simulation.
struct QubitModel {
  SensorDesign design;
  double gamma10 = 1.0 / 4.3;       // 1/us, background relaxation
  double field_junction = 15.0;     // V/m, rms qubit field in junction barriers
  double field_surface = 30.0;      // V/m, at electrode surfaces
  double dielectric_volume_um3 = 2.25e-3;

  double field_for(Location loc) const {
    switch (loc) {
      case Location::Junction:
      case Location::StrayJunction: return field_junction;
      case Location::SurfaceElectrode: return field_surface;
      default: return sample_field_rms(design);
    }
  }
};

struct SimulationOptions {
  double noise_sigma = 0.10;      // log-normal sigma on T1; 0 disables
  double missing_fraction = 0.0;  // probability a cell is reported missing
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct DatasetMeta {
  int schema_version = dataset_schema_version;
  std::uint64_t seed = 0;
  QubitModel qubit;
  ControlChain chain;
  double noise_sigma = 0.0;
  double missing_fraction = 0.0;
};

/// T1 estimates on a (segment, bias step, qubit frequency) grid. Missing
/// cells hold NaN.
struct SpectroscopyDataset {
  std::vector<Segment> segments;
  std::vector<double> freq_axis;            // GHz, uniform, increasing
  std::vector<std::vector<double>> t1;      // [segment][step * n_freq + f]
  DatasetMeta meta;

  std::size_t n_freq() const { return freq_axis.size(); }
  double freq_step() const { return freq_axis.size() > 1 ? freq_axis[1] - freq_axis[0] : 0.0; }
  double t1_at(std::size_t seg, std::size_t step, std::size_t f) const {
    return t1[seg][step * n_freq() + f];
  }
  /// Observed frequency range, GHz.
  double span() const { return freq_axis.empty() ? 0.0 : freq_axis.back() - freq_axis.front(); }

  void validate() const {
    if (freq_axis.size() < 2) throw InvalidArgument("dataset: frequency axis too short");
    const double step = freq_step();
    if (!(step > 0)) throw InvalidArgument("dataset: frequency axis not increasing");
    for (std::size_t i = 1; i < freq_axis.size(); ++i) {
      const double d = freq_axis[i] - freq_axis[i - 1];
      if (!(d > 0) || std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(freq_axis[i])) + 1e-9 * step)
        throw InvalidArgument("dataset: frequency axis not uniform");
    }
    if (t1.size() != segments.size()) throw InvalidArgument("dataset: T1 grid/segment mismatch");
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (segments[s].steps() == 0) throw InvalidArgument("dataset: empty segment");
      if (t1[s].size() != segments[s].steps() * n_freq())
        throw InvalidArgument("dataset: T1 grid has wrong size");
      for (std::size_t k = 0; k < segments[s].steps(); ++k) {
        std::size_t missing = 0;
        for (std::size_t f = 0; f < n_freq(); ++f) {
          const double v = t1_at(s, k, f);
          if (std::isnan(v)) ++missing;
          else if (!(v > 0)) throw InvalidArgument("dataset: non-positive T1");
        }
        if (2 * missing >= n_freq()) throw InvalidArgument("dataset: trace more than half missing");
      }
    }
  }
};

inline std::vector<double> frequency_axis(double start, double stop, double step) {
  if (!(step > 0) || !(stop > start)) throw InvalidArgument("frequency_axis: bad range");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + step * double(i);
  return v;
}

/// One Lorentzian relaxation channel: Gamma = 2 g^2 Gamma2 / (delta^2 + Gamma2^2)
/// with g and delta as angular rates (rad/us).
inline double lorentzian_rate(double g_mhz, double gamma2, double detuning_ghz) {
  const double g = units::mhz_to_rad_per_us(g_mhz);
  const double delta = units::ghz_to_rad_per_us(detuning_ghz);
  return 2.0 * g * g * gamma2 / (delta * delta + gamma2 * gamma2);
}

/// Synthetic T1 map. Independent TLS add Lorentzian relaxation channels at
/// their transition frequency; coupled pairs contribute their two
/// single-excitation transitions, each coupled to the qubit through the
/// sigma_x~ matrix elements of the hybridized eigenstate.
inline SpectroscopyDataset t1_map(const std::vector<TlsParams>& tls, const std::vector<CoupledPair>& pairs,
                                  const QubitModel& qubit, std::vector<Segment> segments,
                                  std::vector<double> freq_axis, const ControlChain& chain,
                                  const SimulationOptions& opt) {
  if (segments.empty() || freq_axis.empty()) throw InvalidArgument("t1_map: empty grid");
  for (const auto& s : segments)
    for (std::size_t k = 0; k < s.steps(); ++k) s.bias_at(k).validate(chain.v_s_limit);

  SpectroscopyDataset ds;
  ds.segments = std::move(segments);
  ds.freq_axis = std::move(freq_axis);
  ds.meta.seed = opt.seed;
  ds.meta.qubit = qubit;
  ds.meta.chain = chain;
  ds.meta.noise_sigma = opt.noise_sigma;
  ds.meta.missing_fraction = opt.missing_fraction;
  const std::size_t nf = ds.n_freq();
  ds.t1.resize(ds.segments.size());
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (std::size_t s = 0; s < ds.segments.size(); ++s) {
    ds.t1[s].assign(ds.segments[s].steps() * nf, 0.0);
    for (std::size_t k = 0; k < ds.segments[s].steps(); ++k) rows.emplace_back(s, k);
  }

  struct Channel {
    double freq, g, gamma2;
  };
  const Matrix2 sx = pauli::x();
  const Matrix4 sx1 = kron(sx, pauli::identity());
  const Matrix4 sx2 = kron(pauli::identity(), sx);

  parallel_for(rows.size(), opt.threads, [&](std::size_t r) {
    const auto [s, k] = rows[r];
    const BiasPoint b = ds.segments[s].bias_at(k);
    std::vector<Channel> channels;
    channels.reserve(tls.size() + 2 * pairs.size());
    for (const auto& t : tls)
      channels.push_back({transition_energy(t, b), coupling_strength(t, qubit.field_for(t.location), b),
                          t.gamma2_tls});
    for (const auto& p : pairs) {
      const Spectrum4 sp = pair_spectrum(p, b, CoupledModel::Truncated);
      const double g1 = coupling_strength(p.tls1, qubit.field_for(p.tls1.location), b);
      const double g2 = coupling_strength(p.tls2, qubit.field_for(p.tls2.location), b);
      const Matrix4& u = sp.eigenvectors();
      for (std::size_t lvl = 1; lvl <= 2; ++lvl) {
        cplx m1{}, m2{};
        double w1 = 0;
        for (std::size_t i = 0; i < 4; ++i)
          for (std::size_t j = 0; j < 4; ++j) {
            m1 += std::conj(u(i, lvl)) * sx1(i, j) * u(j, 0);
            m2 += std::conj(u(i, lvl)) * sx2(i, j) * u(j, 0);
          }
        w1 = std::norm(m1) / std::max(std::norm(m1) + std::norm(m2), 1e-300);
        const double g = std::abs(g1 * m1 + g2 * m2);
        const double gamma2 = w1 * p.tls1.gamma2_tls + (1.0 - w1) * p.tls2.gamma2_tls;
        channels.push_back({sp.spectrum.eigenvalues[lvl] - sp.spectrum.eigenvalues[0], g, gamma2});
      }
    }
    Engine gen = make_engine(opt.seed, {0x7131ULL, s, k});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double* out = &ds.t1[s][k * nf];
    for (std::size_t f = 0; f < nf; ++f) {
      double rate = qubit.gamma10;
      for (const auto& c : channels) rate += lorentzian_rate(c.g, c.gamma2, ds.freq_axis[f] - c.freq);
      double t1v = 1.0 / rate;
      // Draw both variates unconditionally so the stream layout is fixed.
      const double z = normal(gen);
      const double u = unit(gen);
      if (opt.noise_sigma > 0) t1v *= std::exp(opt.noise_sigma * z);
      if (opt.missing_fraction > 0 && u < opt.missing_fraction)
        t1v = std::numeric_limits<double>::quiet_NaN();
      out[f] = t1v;
    }
  });
  return ds;
}

}  // namespace tlsscope
