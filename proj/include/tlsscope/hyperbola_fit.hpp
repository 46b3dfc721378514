#pragma once

// Hyperbolic resonance-curve fits f(V) = sqrt(delta0^2 + (eps + gamma V)^2).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tlsscope/errors.hpp"
#include "tlsscope/lm.hpp"
#include "tlsscope/stm.hpp"
#include "tlsscope/traces.hpp"

namespace tlsscope {

struct TraceFit {
  double delta0 = 0.0;       // GHz
  double eps_at_zero = 0.0;  // GHz, asymmetry at V = 0
  double gamma = 0.0;        // GHz/V, canonicalized >= 0
  std::array<double, 9> covariance{};  // (delta0, eps, gamma), row-major
  double residual_rms = 0.0;           // GHz
  bool delta0_in_window = false;       // vertex -eps/gamma inside the bias range
  bool sign_ambiguous = true;          // (eps, gamma) -> (-eps, -gamma) fits equally
  int iterations = 0;
  std::vector<double> visible_fraction_per_segment;

  double sigma_delta0() const { return std::sqrt(covariance[0]); }
  double sigma_eps() const { return std::sqrt(covariance[4]); }
  double sigma_gamma() const { return std::sqrt(covariance[8]); }
};

struct HyperbolaOptions {
  double freq_resolution = 2e-3;  // GHz, grid step of the underlying map
  LmOptions lm;
};

namespace detail {

/// Weighted least squares for small dense systems: returns beta minimizing
/// sum w (y - X beta)^2, or nullopt if the normal matrix is singular.
inline std::optional<std::vector<double>> weighted_lstsq(const std::vector<double>& x, std::size_t p,
                                                         std::span<const double> y,
                                                         std::span<const double> w) {
  const std::size_t n = y.size();
  std::vector<double> a(p * p, 0.0), b(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &x[i * p];
    for (std::size_t r = 0; r < p; ++r) {
      b[r] += w[i] * row[r] * y[i];
      for (std::size_t c = 0; c < p; ++c) a[r * p + c] += w[i] * row[r] * row[c];
    }
  }
  double dmax = 0;
  for (std::size_t r = 0; r < p; ++r) dmax = std::max(dmax, a[r * p + r]);
  for (std::size_t r = 0; r < p; ++r) a[r * p + r] += 1e-14 * dmax;
  if (!cholesky_solve(a, b, p)) return std::nullopt;
  return b;
}

inline void check_fit_input(std::span<const double> v, std::span<const double> f, std::span<const double> w) {
  if (v.size() != f.size() || (!w.empty() && w.size() != v.size()))
    throw InvalidArgument("fit_hyperbola: mismatched input sizes");
  if (v.size() < 5) throw InvalidArgument("fit_hyperbola: need at least 5 points");
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]) || !std::isfinite(f[i]) || (!w.empty() && !(w[i] > 0)))
      throw InvalidArgument("fit_hyperbola: non-finite input or non-positive weight");
}

}  // namespace detail

/// Weighted fit of resonance points (v_i, f_i). Initial values come from
/// the quadratic regression f^2 = a + b V + c V^2; the optimum is refined
/// by Levenberg-Marquardt with an analytic Jacobian and the covariance is
/// taken from the Jacobian there.
///
/// Throws DegenerateTrace when the points barely move in frequency and
/// neither slope nor curvature is significant, NoConvergence when the
/// optimizer does not settle within the iteration limit.
inline TraceFit fit_hyperbola(std::span<const double> v, std::span<const double> f,
                              std::span<const double> w = {}, const HyperbolaOptions& opt = {}) {
  detail::check_fit_input(v, f, w);
  const std::size_t n = v.size();
  std::vector<double> weights(n, 1.0);
  if (!w.empty()) weights.assign(w.begin(), w.end());

  const auto [vmin_it, vmax_it] = std::minmax_element(v.begin(), v.end());
  const auto [fmin_it, fmax_it] = std::minmax_element(f.begin(), f.end());
  const double vmin = *vmin_it, vmax = *vmax_it;
  if (!(vmax > vmin)) throw DegenerateTrace("fit_hyperbola: all points at one bias value");
  const double excursion = *fmax_it - *fmin_it;

  // Regression in the centered, scaled variable u = (V - vc) / vs.
  const double vc = 0.5 * (vmin + vmax), vs = 0.5 * (vmax - vmin);
  std::vector<double> design(n * 3), f2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (v[i] - vc) / vs;
    design[i * 3 + 0] = 1.0;
    design[i * 3 + 1] = u;
    design[i * 3 + 2] = u * u;
    f2[i] = f[i] * f[i];
  }
  const auto beta = detail::weighted_lstsq(design, 3, f2, weights);
  if (!beta) throw DegenerateTrace("fit_hyperbola: singular regression");
  double qa = (*beta)[0], qb = (*beta)[1], qc = (*beta)[2];

  // Significance of slope and curvature of f^2 from the regression residuals.
  {
    double rss = 0, wsum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (v[i] - vc) / vs;
      const double r = f2[i] - (qa + qb * u + qc * u * u);
      rss += weights[i] * r * r;
      wsum += weights[i];
    }
    (void)wsum;
    const double s2 = n > 3 ? rss / double(n - 3) : 0.0;
    std::vector<double> a(9, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) a[r * 3 + c] += weights[i] * design[i * 3 + r] * design[i * 3 + c];
    const auto inv = detail::psd_inverse(a, 3);
    const double sb = std::sqrt(s2 * inv[4]), sc = std::sqrt(s2 * inv[8]);
    const bool slope_sig = std::abs(qb) > 3.0 * sb;
    const bool curv_sig = std::abs(qc) > 3.0 * sc;
    if (excursion <= 3.0 * opt.freq_resolution && !(slope_sig && curv_sig))
      throw DegenerateTrace("fit_hyperbola: trace excursion " + std::to_string(excursion * 1e3) +
                            " MHz is within the frequency resolution");
  }

  // Back to (delta0, eps, gamma) in the original variable.
  std::vector<double> x0(3);
  {
    // f^2 = qa + qb u + qc u^2 with u = (V - vc)/vs
    const double c2 = qc / (vs * vs);                  // gamma^2
    const double c1 = qb / vs - 2.0 * qc * vc / (vs * vs);
    const double c0 = qa - qb * vc / vs + qc * vc * vc / (vs * vs);
    double gamma = c2 > 0 ? std::sqrt(c2) : 0.0;
    double eps, d2;
    if (gamma > 0) {
      eps = c1 / (2.0 * gamma);
      d2 = c0 - eps * eps;
    } else {
      // Concave or flat f^2: start from a straight line through the data.
      gamma = std::abs(c1) / (2.0 * std::max(*fmin_it, 1e-9)) + 1e-12;
      eps = std::copysign(std::sqrt(std::max(c0, 0.0)), c1);
      d2 = 0.25 * (*fmin_it) * (*fmin_it);
    }
    if (!(d2 > 0)) d2 = 0.25 * (*fmin_it) * (*fmin_it);
    x0 = {std::sqrt(d2), eps, gamma};
  }

  auto model = [&](std::span<const double> x, std::vector<double>& r, std::vector<double>& jac) {
    const double d = x[0], e = x[1], g = x[2];
    for (std::size_t i = 0; i < n; ++i) {
      const double sw = std::sqrt(weights[i]);
      const double a = e + g * v[i];
      const double fi = std::sqrt(d * d + a * a);
      r[i] = sw * (fi - f[i]);
      const double inv = fi > 0 ? 1.0 / fi : 0.0;
      jac[i * 3 + 0] = sw * d * inv;
      jac[i * 3 + 1] = sw * a * inv;
      jac[i * 3 + 2] = sw * a * v[i] * inv;
    }
  };
  LmResult res = levenberg_marquardt(model, x0, n, opt.lm);
  if (!res.converged)
    throw NoConvergence("fit_hyperbola: no convergence after " + std::to_string(res.iterations) + " iterations");

  TraceFit out;
  double d = res.params[0], e = res.params[1], g = res.params[2];
  std::array<double, 3> sign{1.0, 1.0, 1.0};
  if (d < 0) {
    d = -d;
    sign[0] = -1.0;
  }
  if (g < 0) {
    g = -g;
    e = -e;
    sign[1] = sign[2] = -1.0;
  }
  out.delta0 = d;
  out.eps_at_zero = e;
  out.gamma = g;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) out.covariance[r * 3 + c] = sign[r] * sign[c] * res.covariance[r * 3 + c];
  out.iterations = res.iterations;
  double wsum = 0;
  for (double wi : weights) wsum += wi;
  out.residual_rms = std::sqrt(res.rss / wsum);
  if (g > 0) {
    const double vertex = -e / g;
    out.delta0_in_window = vertex >= vmin && vertex <= vmax;
  }
  return out;
}

inline TraceFit fit_hyperbola(const Trace& trace, const HyperbolaOptions& opt = {}) {
  std::vector<double> v, f, w;
  for (const auto& p : trace.points) {
    v.push_back(p.bias);
    f.push_back(p.freq);
    w.push_back(p.weight);
  }
  return fit_hyperbola(v, f, w, opt);
}

/// Joint fit of a TLS followed through several segments, possibly with
/// different controls: f = sqrt(delta0^2 + (eps0 + sum_c gamma_c V_c)^2).
/// Controls that do not vary along the chain are absorbed into eps0.
struct ChainFit {
  double delta0 = 0.0;
  double eps0 = 0.0;
  std::array<std::optional<double>, 3> gamma;  // per Control, only varied ones
  std::array<double, 3> sigma_gamma{};
  std::vector<double> covariance;              // (delta0, eps0, gamma_c...) row-major
  std::vector<Control> parameters;             // control of each gamma parameter
  double residual_rms = 0.0;
  bool delta0_in_window = false;
  /// True when the data fix only the slopes, not delta0: the gammas are
  /// then the straight-line limit (a lower bound on |gamma|).
  bool linear_regime = false;
  double sigma_delta0 = 0.0;
  std::size_t n_points = 0;
};

struct ChainPoint {
  BiasPoint bias;
  double freq;
  double weight;
  std::size_t segment;
};

namespace detail {

inline std::size_t control_index(Control c) { return static_cast<std::size_t>(c); }

}  // namespace detail

/// Fits the points of a chain jointly. `segment_fits` holds per-segment
/// hyperbola fits where available; a segment whose vertex is in its window
/// supplies the sign change of the asymmetry for the starting values.
inline ChainFit fit_chain(const std::vector<ChainPoint>& pts, const std::vector<Control>& varied,
                          const std::vector<std::pair<std::size_t, std::optional<TraceFit>>>& segment_fits,
                          const HyperbolaOptions& opt = {}) {
  const std::size_t n = pts.size();
  const std::size_t p = 2 + varied.size();
  if (n < p + 2) throw DegenerateTrace("fit_chain: too few points");
  double fmin = std::numeric_limits<double>::infinity();
  for (const auto& q : pts) fmin = std::min(fmin, q.freq);

  auto volt = [&](const ChainPoint& q, std::size_t j) { return bias_component(q.bias, varied[j]); };

  auto model = [&](std::span<const double> x, std::vector<double>& r, std::vector<double>& jac) {
    for (std::size_t i = 0; i < n; ++i) {
      const double sw = std::sqrt(pts[i].weight);
      double a = x[1];
      for (std::size_t j = 0; j < varied.size(); ++j) a += x[2 + j] * volt(pts[i], j);
      const double fi = std::sqrt(x[0] * x[0] + a * a);
      const double inv = fi > 0 ? 1.0 / fi : 0.0;
      r[i] = sw * (fi - pts[i].freq);
      jac[i * p + 0] = sw * x[0] * inv;
      jac[i * p + 1] = sw * a * inv;
      for (std::size_t j = 0; j < varied.size(); ++j) jac[i * p + 2 + j] = sw * a * inv * volt(pts[i], j);
    }
  };

  // Sign of the asymmetry per point: constant except across a vertex seen
  // inside some segment, and continuous across segment boundaries.
  std::vector<double> sign(n, 1.0);
  {
    double s = 1.0;
    std::size_t i = 0;
    while (i < n) {
      const std::size_t seg = pts[i].segment;
      std::optional<TraceFit> fit;
      for (const auto& [sidx, sf] : segment_fits)
        if (sidx == seg) fit = sf;
      std::size_t j = i;
      while (j < n && pts[j].segment == seg) ++j;
      if (fit && fit->delta0_in_window && fit->gamma > 0) {
        // Orient the segment so its first point carries the running sign.
        const Control c = [&] {
          for (Control cc : all_controls)
            if (bias_component(pts[i].bias, cc) != bias_component(pts[j - 1].bias, cc)) return cc;
          return Control::Sample;
        }();
        const double first = fit->eps_at_zero + fit->gamma * bias_component(pts[i].bias, c);
        const double flip = (first < 0 ? -1.0 : 1.0) * s;
        for (std::size_t k = i; k < j; ++k) {
          const double a = fit->eps_at_zero + fit->gamma * bias_component(pts[k].bias, c);
          sign[k] = (a < 0 ? -1.0 : 1.0) * flip;
        }
        s = sign[j - 1];
      } else {
        for (std::size_t k = i; k < j; ++k) sign[k] = s;
      }
      i = j;
    }
  }

  std::vector<double> d_candidates;
  for (int k = 0; k <= 10; ++k) d_candidates.push_back(fmin * (0.05 + 0.094 * k));
  for (const auto& [sidx, sf] : segment_fits)
    if (sf && sf->delta0_in_window && sf->delta0 > 0 && sf->delta0 < 1.5 * fmin) d_candidates.push_back(sf->delta0);

  struct Start {
    double rss;
    std::vector<double> x;
  };
  std::vector<Start> starts;
  std::vector<double> design(n * (p - 1)), y(n), w(n);
  for (double d0 : d_candidates) {
    for (std::size_t i = 0; i < n; ++i) {
      design[i * (p - 1)] = 1.0;
      for (std::size_t j = 0; j < varied.size(); ++j) design[i * (p - 1) + 1 + j] = volt(pts[i], j);
      y[i] = sign[i] * std::sqrt(std::max(pts[i].freq * pts[i].freq - d0 * d0, 0.0));
      w[i] = pts[i].weight;
    }
    const auto beta = detail::weighted_lstsq(design, p - 1, y, w);
    if (!beta) continue;
    std::vector<double> x{d0};
    x.insert(x.end(), beta->begin(), beta->end());
    std::vector<double> r(n), jac(n * p);
    model(x, r, jac);
    double rss = 0;
    for (double e : r) rss += e * e;
    if (std::isfinite(rss)) starts.push_back({rss, x});
  }
  if (starts.empty()) throw DegenerateTrace("fit_chain: no usable starting point");
  std::sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) { return a.rss < b.rss; });

  std::optional<LmResult> best;
  for (std::size_t k = 0; k < std::min<std::size_t>(3, starts.size()); ++k) {
    LmResult res = levenberg_marquardt(model, starts[k].x, n, opt.lm);
    if (!best || res.rss < best->rss) best = std::move(res);
  }
  if (!best->converged) throw NoConvergence("fit_chain: no convergence");

  ChainFit out;
  out.n_points = n;
  out.parameters = varied;
  std::vector<double> x = best->params;
  std::vector<double> s(p, 1.0);
  if (x[0] < 0) {
    x[0] = -x[0];
    s[0] = -1.0;
  }
  if (!varied.empty() && x[2] < 0) {
    for (std::size_t k = 1; k < p; ++k) {
      x[k] = -x[k];
      s[k] = -1.0;
    }
  }
  out.delta0 = x[0];
  out.eps0 = x[1];
  out.covariance.resize(p * p);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < p; ++c) out.covariance[r * p + c] = s[r] * s[c] * best->covariance[r * p + c];
  out.sigma_delta0 = std::sqrt(out.covariance[0]);
  for (std::size_t j = 0; j < varied.size(); ++j) {
    out.gamma[detail::control_index(varied[j])] = x[2 + j];
    out.sigma_gamma[detail::control_index(varied[j])] = std::sqrt(out.covariance[(2 + j) * p + 2 + j]);
  }
  double wsum = 0;
  for (const auto& q : pts) wsum += q.weight;
  out.residual_rms = std::sqrt(best->rss / wsum);
  bool crosses = false;
  for (std::size_t i = 0; i < n; ++i) {
    double a = x[1];
    for (std::size_t j = 0; j < varied.size(); ++j) a += x[2 + j] * volt(pts[i], j);
    if (i > 0) {
      double a_prev = x[1];
      for (std::size_t j = 0; j < varied.size(); ++j) a_prev += x[2 + j] * volt(pts[i - 1], j);
      crosses = crosses || (a_prev <= 0) != (a <= 0);
    }
  }
  out.delta0_in_window = crosses;

  // Without a visible vertex and with delta0 unresolved, only the slopes
  // df/dV_c = gamma_c * eps / E are measured. Report those (delta0 -> 0).
  if (!crosses && !(out.sigma_delta0 < 0.25 * out.delta0)) {
    out.linear_regime = true;
    for (std::size_t i = 0; i < n; ++i) {
      design[i * (p - 1)] = 1.0;
      for (std::size_t j = 0; j < varied.size(); ++j) design[i * (p - 1) + 1 + j] = volt(pts[i], j);
      y[i] = pts[i].freq;
      w[i] = pts[i].weight;
    }
    const auto beta = detail::weighted_lstsq(design, p - 1, y, w);
    if (beta) {
      double rss = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double m = (*beta)[0];
        for (std::size_t j = 0; j < varied.size(); ++j) m += (*beta)[1 + j] * volt(pts[i], j);
        rss += w[i] * (y[i] - m) * (y[i] - m);
      }
      const double s2 = rss / double(n > p - 1 ? n - (p - 1) : 1);
      std::vector<double> a((p - 1) * (p - 1), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < p - 1; ++r)
          for (std::size_t c = 0; c < p - 1; ++c)
            a[r * (p - 1) + c] += w[i] * design[i * (p - 1) + r] * design[i * (p - 1) + c];
      const auto inv = detail::psd_inverse(a, p - 1);
      for (std::size_t j = 0; j < varied.size(); ++j) {
        out.gamma[detail::control_index(varied[j])] = std::abs((*beta)[1 + j]);
        out.sigma_gamma[detail::control_index(varied[j])] = std::sqrt(s2 * inv[(1 + j) * (p - 1) + 1 + j]);
      }
    }
  }
  return out;
}

}  // namespace tlsscope
