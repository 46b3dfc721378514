#pragma once

// Dataset -> traces -> fits -> classification -> densities -> material report.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tlsscope/classify.hpp"
#include "tlsscope/dataset.hpp"
#include "tlsscope/hyperbola_fit.hpp"
#include "tlsscope/metrics.hpp"
#include "tlsscope/parallel.hpp"
#include "tlsscope/serialize.hpp"
#include "tlsscope/traces.hpp"

namespace tlsscope {

struct PipelineOptions {
  ExtractOptions extract;
  LmOptions lm;
  /// A control is seen to act on a TLS when |gamma| * bias span exceeds
  /// `span_steps` frequency-grid steps and |gamma| exceeds `n_sigma` sigma.
  double span_steps = 3.0;
  double n_sigma = 3.0;
  /// Chain fits with an rms residual above this many frequency-grid steps
  /// do not describe one TLS (misjoined traces); they give no dipole.
  double max_residual_steps = 0.5;
  unsigned threads = 1;
};

struct SegmentResponse {
  std::size_t segment = 0;
  Control control = Control::Sample;
  std::optional<TraceFit> fit;
  double slope = 0.0;        // GHz/V, straight-line fit
  double slope_sigma = 0.0;
  double bias_span = 0.0;    // V
  bool responds = false;
};

struct TlsResult {
  std::size_t id = 0;
  LocationVerdict verdict;
  std::optional<ChainFit> fit;
  bool fit_consistent = false;
  std::vector<SegmentResponse> segments;
  std::vector<double> visible_fractions;  // one per dataset segment
  double p_parallel = std::numeric_limits<double>::quiet_NaN();  // e*A, sample TLS only
  double density = 0.0;                                          // 1/GHz
};

struct FitReport {
  std::vector<TlsResult> tls;
  std::map<Location, double> spectral_density;
  MaterialReport material;
  std::size_t n_segments = 0;
  double span_ghz = 0.0;
  double freq_step_ghz = 0.0;
  std::size_t n_traces = 0;
};

namespace detail {

struct LineFit {
  double slope = 0.0, sigma = std::numeric_limits<double>::infinity();
};

inline LineFit weighted_line(const Trace& t) {
  std::vector<double> x, y, w;
  for (const auto& p : t.points) {
    x.push_back(1.0);
    x.push_back(p.bias);
    y.push_back(p.freq);
    w.push_back(p.weight);
  }
  LineFit out;
  const auto beta = weighted_lstsq(x, 2, y, w);
  if (!beta || t.points.size() < 3) return out;
  double rss = 0;
  std::vector<double> a(4, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - (*beta)[0] - (*beta)[1] * x[2 * i + 1];
    rss += w[i] * r * r;
    for (std::size_t r1 = 0; r1 < 2; ++r1)
      for (std::size_t c = 0; c < 2; ++c) a[r1 * 2 + c] += w[i] * x[2 * i + r1] * x[2 * i + c];
  }
  const auto inv = psd_inverse(a, 2);
  out.slope = (*beta)[1];
  out.sigma = std::sqrt(rss / double(y.size() - 2) * inv[3]);
  return out;
}

}  // namespace detail

/// Response of one trace to its segment's control.
inline SegmentResponse segment_response(const Trace& t, double fstep, const PipelineOptions& opt) {
  SegmentResponse r;
  r.segment = t.segment;
  r.control = t.control;
  r.bias_span = std::abs(t.points.back().bias - t.points.front().bias);
  const double min_change = opt.span_steps * fstep;
  try {
    HyperbolaOptions ho;
    ho.freq_resolution = fstep;
    ho.lm = opt.lm;
    r.fit = fit_hyperbola(t, ho);
    const double sg = r.fit->sigma_gamma();
    r.responds = r.fit->gamma * r.bias_span > min_change && r.fit->gamma > opt.n_sigma * sg;
  } catch (const DegenerateTrace&) {
    return r;
  } catch (const NoConvergence&) {
  }
  const auto line = detail::weighted_line(t);
  r.slope = line.slope;
  r.slope_sigma = line.sigma;
  // Far from the vertex the hyperbola's parameters are correlated and its
  // gamma is poorly constrained while the straight-line slope is not.
  if (!r.responds)
    r.responds = std::abs(line.slope) * r.bias_span > min_change && std::abs(line.slope) > opt.n_sigma * line.sigma;
  return r;
}

inline FitReport analyze_dataset(const SpectroscopyDataset& ds, const PipelineOptions& opt = {}) {
  ds.validate();
  FitReport rep;
  rep.n_segments = ds.segments.size();
  rep.span_ghz = ds.span();
  rep.freq_step_ghz = ds.freq_step();
  ExtractOptions eo = opt.extract;
  eo.threads = opt.threads;
  const std::vector<Trace> traces = extract_traces(ds, eo);
  rep.n_traces = traces.size();
  const std::vector<TraceChain> chains = link_chains(ds, traces, eo);
  const double fstep = ds.freq_step();
  const double d_nm = ds.meta.qubit.design.d_nm;

  rep.tls.resize(chains.size());
  parallel_for(chains.size(), opt.threads, [&](std::size_t c) {
    TlsResult& out = rep.tls[c];
    out.id = c + 1;
    out.visible_fractions.assign(ds.segments.size(), 0.0);
    LocationEvidence ev;
    ev.single_segment = chains[c].n_segments() == 1;
    std::vector<ChainPoint> pts;
    std::vector<Control> varied;
    std::vector<std::pair<std::size_t, std::optional<TraceFit>>> seg_fits;
    for (std::size_t ti : chains[c].traces) {
      const Trace& t = traces[ti];
      SegmentResponse resp = segment_response(t, fstep, opt);
      if (resp.responds) {
        if (t.control == Control::Piezo) ev.responds_p = true;
        if (t.control == Control::Global) ev.responds_g = true;
        if (t.control == Control::Sample) ev.responds_s = true;
      }
      seg_fits.emplace_back(t.segment, resp.fit);
      out.segments.push_back(std::move(resp));
      out.visible_fractions[t.segment] =
          double(t.last_step() - t.first_step() + 1) / double(ds.segments[t.segment].steps());
      if (std::find(varied.begin(), varied.end(), t.control) == varied.end()) varied.push_back(t.control);
      for (const auto& p : t.points) pts.push_back({ds.segments[t.segment].bias_at(p.step), p.freq, p.weight, t.segment});
    }
    std::sort(varied.begin(), varied.end());
    out.verdict = classify_location(ev);
    out.density = spectral_density_of(out.visible_fractions, ds.segments.size(), ds.span());
    try {
      HyperbolaOptions ho;
      ho.freq_resolution = fstep;
      ho.lm = opt.lm;
      out.fit = fit_chain(pts, varied, seg_fits, ho);
    } catch (const DegenerateTrace&) {
    } catch (const NoConvergence&) {
    }
    out.fit_consistent = out.fit && out.fit->residual_rms <= opt.max_residual_steps * fstep;
    if (out.verdict.location == Location::SampleDielectric && out.fit_consistent) {
      const auto& gs = out.fit->gamma[detail::control_index(Control::Sample)];
      if (gs) out.p_parallel = dipole_from_gamma(std::abs(*gs), d_nm);
    }
  });

  std::vector<DipoleSample> samples;
  for (const auto& t : rep.tls) {
    rep.spectral_density[t.verdict.location] += t.density;
    samples.push_back({t.verdict.location, t.p_parallel, t.density});
  }
  MaterialAssumptions ma;
  ma.dielectric_volume_um3 = ds.meta.qubit.dielectric_volume_um3;
  ma.eps_r = ds.meta.qubit.design.eps_r;
  ma.d_nm = d_nm;
  ma.field_sample = sample_field_rms(ds.meta.qubit.design);
  ma.field_junction = ds.meta.qubit.field_junction;
  ma.t1_us = 1.0 / ds.meta.qubit.gamma10;
  rep.material = material_report(samples, ma);
  return rep;
}

namespace detail {

inline json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

inline json to_json(const TlsResult& t) {
  json gammas = json::object(), sigmas = json::object();
  json j = {{"id", t.id},
            {"class", std::string(to_string(t.verdict.location))},
            {"evidence", {{"piezo", t.verdict.evidence.responds_p},
                          {"global", t.verdict.evidence.responds_g},
                          {"sample", t.verdict.evidence.responds_s},
                          {"single_segment", t.verdict.evidence.single_segment}}},
            {"visible_fractions", t.visible_fractions},
            {"spectral_density_per_GHz", t.density},
            {"p_parallel_eA", detail::nullable(t.p_parallel)}};
  json segs = json::array();
  for (const auto& s : t.segments)
    segs.push_back({{"segment", s.segment},
                    {"control", std::string(to_string(s.control))},
                    {"responds", s.responds},
                    {"slope_GHz_per_V", detail::nullable(s.slope)}});
  j["segments"] = segs;
  if (t.fit) {
    const ChainFit& f = *t.fit;
    for (Control c : f.parameters) {
      const auto i = detail::control_index(c);
      gammas[std::string(to_string(c))] = detail::nullable(*f.gamma[i]);
      sigmas[std::string(to_string(c))] = detail::nullable(f.sigma_gamma[i]);
    }
    json cov = json::array();
    for (double v : f.covariance) cov.push_back(detail::nullable(v));
    j["delta0_GHz"] = detail::nullable(f.delta0);
    j["delta0_sigma_GHz"] = detail::nullable(f.sigma_delta0);
    j["delta0_in_window"] = f.delta0_in_window;
    j["linear_regime"] = f.linear_regime;
    j["fit_consistent"] = t.fit_consistent;
    j["eps0_GHz"] = f.eps0;
    j["gammas_GHz_per_V"] = gammas;
    j["gamma_sigmas_GHz_per_V"] = sigmas;
    j["covariance"] = cov;
    j["residual_rms_MHz"] = units::ghz_to_mhz(f.residual_rms);
  } else {
    j["delta0_GHz"] = nullptr;
    j["gammas_GHz_per_V"] = gammas;
  }
  return j;
}

inline json to_json(const FitReport& r, std::optional<Location> filter = std::nullopt) {
  json tls = json::array();
  for (const auto& t : r.tls)
    if (!filter || t.verdict.location == *filter) tls.push_back(to_json(t));
  json dens = json::object();
  for (const auto& [loc, v] : r.spectral_density)
    if (!filter || loc == *filter) dens[std::string(to_string(loc))] = v;
  return {{"schema_version", schema_version},
          {"dataset", {{"segments", r.n_segments},
                       {"span_GHz", r.span_ghz},
                       {"freq_step_GHz", r.freq_step_ghz},
                       {"traces", r.n_traces}}},
          {"tls", tls},
          {"spectral_density_per_GHz", dens},
          {"material", to_json(r.material)}};
}

}  // namespace tlsscope
