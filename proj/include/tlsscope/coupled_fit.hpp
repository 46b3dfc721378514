#pragma once

// Coupling constants of an interacting TLS pair from avoided-crossing scans.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tlsscope/coupled.hpp"
#include "tlsscope/errors.hpp"
#include "tlsscope/lm.hpp"
#include "tlsscope/rng.hpp"
#include "tlsscope/traces.hpp"

namespace tlsscope {

/// Transition frequencies observed while sweeping one control at fixed
/// other biases (one strain setting). Points carry no branch label.
struct CrossingPanel {
  BiasPoint base;
  Control control = Control::Sample;
  std::vector<double> bias;    // V
  std::vector<double> freq;    // GHz
  std::vector<double> weight;  // empty: unit weights

  BiasPoint bias_at(std::size_t i) const { return with_bias(base, control, bias[i]); }
};

struct CoupledFitOptions {
  CouplingBasis basis = CouplingBasis::Localized;
  std::vector<double> start_magnitudes{10.0, 30.0};  // MHz, per coupling
  double gamma_p2_start = 0.0;
  /// A competing sign branch within this chi^2 of the optimum makes the
  /// signs ambiguous.
  double ambiguity_chi2 = 1.0;
  /// Couplings smaller than this (MHz) or than 3 sigma carry no sign.
  double sign_floor_mhz = 1e-3;
  /// Residual scale (GHz) below which data count as noiseless.
  double noise_floor_ghz = 1e-7;
  LmOptions lm;
};

struct CoupledFitResult {
  double g_z = 0.0;       // MHz
  double g_x = 0.0;       // MHz
  double gamma_p2 = 0.0;  // GHz/V
  std::array<double, 9> covariance{};
  double rss = 0.0;
  double residual_variance = 0.0;
  int iterations = 0;
  std::vector<double> rss_history;  // of the winning start
  /// Best fit found on each (sign g_z, sign g_x) branch: {g_z, g_x, gamma_p2, rss}.
  std::vector<std::array<double, 4>> branches;

  double sigma(std::size_t i) const { return std::sqrt(covariance[i * 3 + i]); }
};

namespace detail {

inline CoupledPair make_trial_pair(const TlsParams& tls1, TlsParams tls2, CouplingBasis basis, double gz,
                                   double gx, double gp2) {
  tls2.gamma_p = gp2;
  return {tls1, tls2, basis, gz, gx};
}

/// The two single-excitation transitions of the truncated model, GHz.
inline std::array<double, 2> pair_transitions(const CoupledPair& pair, const BiasPoint& b) {
  const Spectrum4 s = pair_spectrum(pair, b, CoupledModel::Truncated);
  return {s.transition_01, s.transition_02};
}

}  // namespace detail

/// Fits (g_z, g_x, gamma_p2) with TLS 1 and the rest of TLS 2 known. Each
/// point is compared with the nearer of the two single-excitation
/// transitions of the truncated eigenbasis model. Starts cover every sign
/// combination of (g_z, g_x); the result is the lowest cost found.
///
/// With the default localized-basis couplings the eigenbasis coefficients
/// change with the mixing angles, which is what makes the sign of g_x
/// observable. For constant eigenbasis couplings the spectrum is invariant
/// under g_x -> -g_x and the fit reports AmbiguousSigns.
inline CoupledFitResult fit_coupled_pair(const std::vector<CrossingPanel>& panels, const TlsParams& tls1,
                                         const TlsParams& tls2, const CoupledFitOptions& opt = {}) {
  // Points sharing a bias point share one diagonalization.
  std::vector<BiasPoint> bias;
  std::vector<std::size_t> bias_of;
  std::vector<double> freq, sw;
  for (const auto& p : panels) {
    if (p.bias.size() != p.freq.size() || (!p.weight.empty() && p.weight.size() != p.bias.size()))
      throw InvalidArgument("fit_coupled_pair: panel size mismatch");
    for (std::size_t i = 0; i < p.bias.size(); ++i) {
      const BiasPoint b = p.bias_at(i);
      if (bias.empty() || !(bias.back() == b)) bias.push_back(b);
      bias_of.push_back(bias.size() - 1);
      freq.push_back(p.freq[i]);
      sw.push_back(p.weight.empty() ? 1.0 : std::sqrt(p.weight[i]));
    }
  }
  const std::size_t n = freq.size();
  if (n < 4) throw InvalidArgument("fit_coupled_pair: need at least 4 points");

  auto transitions = [&](double gz, double gx, double gp2) {
    const CoupledPair pair = detail::make_trial_pair(tls1, tls2, opt.basis, gz, gx, gp2);
    std::vector<std::array<double, 2>> t(bias.size());
    for (std::size_t j = 0; j < bias.size(); ++j) t[j] = detail::pair_transitions(pair, bias[j]);
    return t;
  };
  const std::array<double, 3> h{1e-3, 1e-3, 1e-6};
  auto model = [&](std::span<const double> x, std::vector<double>& r, std::vector<double>& jac) {
    const auto t0 = transitions(x[0], x[1], x[2]);
    std::vector<std::size_t> branch(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = t0[bias_of[i]];
      branch[i] = std::abs(freq[i] - t[0]) <= std::abs(freq[i] - t[1]) ? 0 : 1;
      r[i] = sw[i] * (t[branch[i]] - freq[i]);
    }
    for (std::size_t k = 0; k < 3; ++k) {
      std::array<double, 3> xp{x[0], x[1], x[2]}, xm = xp;
      xp[k] += h[k];
      xm[k] -= h[k];
      const auto tp = transitions(xp[0], xp[1], xp[2]);
      const auto tm = transitions(xm[0], xm[1], xm[2]);
      for (std::size_t i = 0; i < n; ++i)
        jac[i * 3 + k] = sw[i] * (tp[bias_of[i]][branch[i]] - tm[bias_of[i]][branch[i]]) / (2.0 * h[k]);
    }
  };

  std::optional<LmResult> best;
  std::array<std::optional<LmResult>, 4> per_branch;
  auto branch_of = [&](const std::vector<double>& x) {
    return (x[0] < 0 ? 1 : 0) + (x[1] < 0 ? 2 : 0);
  };
  for (double sz : {1.0, -1.0})
    for (double sx : {1.0, -1.0})
      for (double mz : opt.start_magnitudes)
        for (double mx : opt.start_magnitudes) {
          LmResult res = levenberg_marquardt(model, std::vector<double>{sz * mz, sx * mx, opt.gamma_p2_start}, n, opt.lm);
          auto& slot = per_branch[std::size_t(branch_of(res.params))];
          if (!slot || res.rss < slot->rss) slot = res;
          if (!best || res.rss < best->rss) best = std::move(res);
        }
  if (!best->converged) throw NoConvergence("fit_coupled_pair: optimizer did not converge");

  CoupledFitResult out;
  out.g_z = best->params[0];
  out.g_x = best->params[1];
  out.gamma_p2 = best->params[2];
  std::copy(best->covariance.begin(), best->covariance.end(), out.covariance.begin());
  out.rss = best->rss;
  out.residual_variance = best->residual_variance;
  out.iterations = best->iterations;
  out.rss_history = best->rss_history;
  for (const auto& b : per_branch)
    if (b) out.branches.push_back({b->params[0], b->params[1], b->params[2], b->rss});

  // Sign ambiguity: another branch, differing in the sign of a coupling that
  // is significant, fits within ambiguity_chi2.
  const double s2 = std::max(out.residual_variance, opt.noise_floor_ghz * opt.noise_floor_ghz);
  const bool z_sig = std::abs(out.g_z) > std::max(opt.sign_floor_mhz, 3.0 * out.sigma(0));
  const bool x_sig = std::abs(out.g_x) > std::max(opt.sign_floor_mhz, 3.0 * out.sigma(1));
  const int best_branch = branch_of(best->params);
  for (int b = 0; b < 4; ++b) {
    if (b == best_branch || !per_branch[std::size_t(b)]) continue;
    const bool differs_z = (b & 1) != (best_branch & 1);
    const bool differs_x = (b & 2) != (best_branch & 2);
    if (!((differs_z && z_sig) || (differs_x && x_sig))) continue;
    const double dchi2 = (per_branch[std::size_t(b)]->rss - out.rss) / s2;
    if (dchi2 < opt.ambiguity_chi2) {
      const auto& alt = per_branch[std::size_t(b)]->params;
      throw AmbiguousSigns("fit_coupled_pair: (g_z, g_x) = (" + std::to_string(out.g_z) + ", " +
                           std::to_string(out.g_x) + ") and (" + std::to_string(alt[0]) + ", " +
                           std::to_string(alt[1]) + ") MHz fit equally well (delta chi2 = " +
                           std::to_string(dchi2) + ")");
    }
  }
  return out;
}

/// Offset of the minimum splitting from the symmetry point of TLS 1 along
/// the panel's swept control: v_min - v_sym (V). Its change between strain
/// settings reflects the longitudinal coupling changing sign at the
/// symmetry point.
inline double crossing_asymmetry(const CoupledPair& pair, const CrossingPanel& panel,
                                 const CrossingOptions& copt = {}) {
  if (panel.bias.size() < 3) throw InvalidArgument("crossing_asymmetry: panel too short");
  const double gamma = coupling_to(pair.tls1, panel.control);
  if (gamma == 0.0) throw InvalidArgument("crossing_asymmetry: TLS 1 does not respond to the swept control");
  const BiasPoint zero = with_bias(panel.base, panel.control, 0.0);
  const double v_sym = -asymmetry(pair.tls1, zero) / gamma;
  auto [lo, hi] = std::minmax_element(panel.bias.begin(), panel.bias.end());
  std::vector<BiasPoint> sweep;
  const std::size_t steps = 401;
  for (std::size_t i = 0; i < steps; ++i)
    sweep.push_back(with_bias(panel.base, panel.control, *lo + (*hi - *lo) * double(i) / double(steps - 1)));
  return crossing_geometry(pair, sweep, copt).v_min - v_sym;
}

/// Exact transition points of a pair along a panel sweep, optionally with
/// Gaussian frequency noise (GHz). Both branches are emitted at every bias.
inline CrossingPanel synthetic_panel(const CoupledPair& pair, const BiasPoint& base, Control control,
                                     const std::vector<double>& sweep, double noise_ghz = 0.0,
                                     std::uint64_t seed = 0) {
  CrossingPanel p;
  p.base = with_bias(base, control, 0.0);
  p.control = control;
  Engine gen = make_engine(seed, {0xC0551ULL});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double v : sweep) {
    const auto t = detail::pair_transitions(pair, with_bias(base, control, v));
    for (double f : t) {
      p.bias.push_back(v);
      p.freq.push_back(f + noise_ghz * normal(gen));
    }
  }
  return p;
}

/// Panel made of every resonance point a segment's traces hold.
inline CrossingPanel panel_from_traces(const SpectroscopyDataset& ds, const std::vector<Trace>& traces,
                                       std::size_t segment) {
  CrossingPanel p;
  p.base = ds.segments.at(segment).base;
  p.control = ds.segments.at(segment).control;
  for (const auto& t : traces) {
    if (t.segment != segment) continue;
    for (const auto& q : t.points) {
      p.bias.push_back(q.bias);
      p.freq.push_back(q.freq);
      p.weight.push_back(q.weight);
    }
  }
  return p;
}

}  // namespace tlsscope
