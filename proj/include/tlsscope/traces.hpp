#pragma once

// Resonance-point extraction from T1 maps and trace linking.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tlsscope/dataset.hpp"

namespace tlsscope {

struct TracePoint {
  std::size_t step = 0;
  double bias = 0.0;    // V, swept control
  double freq = 0.0;    // GHz, sub-grid refined
  double depth = 0.0;   // 1 - T1_min / baseline
  double weight = 1.0;
};

/// Resonance points of one TLS within one segment.
struct Trace {
  std::size_t segment = 0;
  Control control = Control::Sample;
  std::vector<TracePoint> points;

  std::size_t first_step() const { return points.front().step; }
  std::size_t last_step() const { return points.back().step; }
};

struct ExtractOptions {
  double threshold = 0.35;        // relative T1 dip below the column median
  double jump_limit = 5.0;        // frequency-grid steps per bias step
  std::size_t max_gap = 3;        // bias steps a trace may skip
  std::size_t min_points = 5;
  double min_prominence = 0.4;    // log T1 rise separating two dips in one run
  unsigned threads = 1;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

/// Sub-grid position of a dip at index i. 1/(Gamma - Gamma_baseline) of a
/// Lorentzian is a parabola in frequency, so three samples around the
/// minimum fix its vertex; when that does not apply, a parabola through
/// log T1 is used instead. The shift is clamped to one grid step.
inline double refine_dip(const double* t1, std::size_t n, std::size_t i, double baseline) {
  if (i == 0 || i + 1 >= n) return 0.0;
  const double a = t1[i - 1], b = t1[i], c = t1[i + 1];
  if (std::isnan(a) || std::isnan(c)) return 0.0;
  const double gb = 1.0 / baseline;
  const double ya = 1.0 / a - gb, yb = 1.0 / b - gb, yc = 1.0 / c - gb;
  double shift = 0.0;
  bool done = false;
  if (ya > 0 && yb > 0 && yc > 0) {
    const double ra = 1.0 / ya, rb = 1.0 / yb, rc = 1.0 / yc;
    const double den = ra - 2.0 * rb + rc;
    if (den > 0) {
      shift = 0.5 * (ra - rc) / den;
      done = true;
    }
  }
  if (!done) {
    const double la = std::log(a), lb = std::log(b), lc = std::log(c);
    const double den = la - 2.0 * lb + lc;
    if (den > 0) shift = 0.5 * (la - lc) / den;
  }
  return std::clamp(shift, -1.0, 1.0);
}

struct Candidate {
  double freq;
  double depth;
};

/// Dips of one bias column: contiguous runs below threshold, split at
/// local maxima that rise by more than `min_prominence` in log T1.
inline std::vector<Candidate> column_candidates(const double* t1, const std::vector<double>& freq,
                                                double fstep, const ExtractOptions& opt) {
  const std::size_t n = freq.size();
  std::vector<double> valid;
  valid.reserve(n);
  for (std::size_t f = 0; f < n; ++f)
    if (!std::isnan(t1[f])) valid.push_back(t1[f]);
  const double baseline = median_of(std::move(valid));
  std::vector<Candidate> out;
  if (!(baseline > 0)) return out;
  const double cut = (1.0 - opt.threshold) * baseline;
  auto below = [&](std::size_t f) { return !std::isnan(t1[f]) && t1[f] < cut; };

  std::size_t f = 0;
  while (f < n) {
    if (!below(f)) {
      ++f;
      continue;
    }
    std::size_t end = f;
    while (end < n && below(end)) ++end;
    // Run [f, end). Local minima with prominence.
    std::vector<std::size_t> minima;
    for (std::size_t i = f; i < end; ++i) {
      const bool left = i == f || t1[i] <= t1[i - 1];
      const bool right = i + 1 == end || t1[i] < t1[i + 1];
      if (left && right) minima.push_back(i);
    }
    std::vector<std::size_t> keep;
    for (std::size_t m : minima) {
      const double lm = std::log(t1[m]);
      double key_left = std::log(cut), key_right = std::log(cut);
      double peak = lm;
      bool deeper_left = false, deeper_right = false;
      for (std::size_t j = m; j-- > f;) {
        peak = std::max(peak, std::log(t1[j]));
        if (t1[j] < t1[m]) {
          deeper_left = true;
          break;
        }
      }
      if (deeper_left) key_left = peak;
      peak = lm;
      for (std::size_t j = m + 1; j < end; ++j) {
        peak = std::max(peak, std::log(t1[j]));
        if (t1[j] <= t1[m]) {
          deeper_right = true;
          break;
        }
      }
      if (deeper_right) key_right = peak;
      const double prominence = std::min(key_left, key_right) - lm;
      if ((!deeper_left && !deeper_right) || prominence >= opt.min_prominence) keep.push_back(m);
    }
    for (std::size_t m : keep) {
      // Dips touching the ends of the frequency window cannot be located.
      if (m == 0 || m + 1 == n) continue;
      const double shift = refine_dip(t1, n, m, baseline);
      out.push_back({freq[m] + shift * fstep, 1.0 - t1[m] / baseline});
    }
    f = end;
  }
  return out;
}

}  // namespace detail

/// Links the per-column candidates of one segment into traces. A trace's
/// next point is predicted from its last two points; open traces claim
/// candidates greedily in order of prediction error, within `jump_limit`
/// grid steps per bias step elapsed.
inline std::vector<Trace> link_segment(const std::vector<std::vector<detail::Candidate>>& columns,
                                       const Segment& seg, std::size_t seg_index, double fstep,
                                       const ExtractOptions& opt) {
  struct Open {
    Trace trace;
    bool closed = false;
  };
  std::vector<Open> open;
  std::vector<Trace> done;
  const double limit = opt.jump_limit * fstep;

  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto& cands = columns[k];
    struct Option {
      double err;
      std::size_t trace, cand;
    };
    std::vector<Option> options;
    for (std::size_t t = 0; t < open.size(); ++t) {
      if (open[t].closed) continue;
      const auto& pts = open[t].trace.points;
      const auto& last = pts.back();
      const double dk = double(k - last.step);
      double pred = last.freq;
      double allowed = limit * dk;
      if (pts.size() >= 2) {
        const auto& prev = pts[pts.size() - 2];
        pred += (last.freq - prev.freq) / double(last.step - prev.step) * dk;
        allowed = limit * std::max(1.0, dk - 1.0);
      }
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const double err = std::abs(cands[c].freq - pred);
        if (err <= allowed) options.push_back({err, t, c});
      }
    }
    std::sort(options.begin(), options.end(), [](const Option& a, const Option& b) {
      if (a.err != b.err) return a.err < b.err;
      if (a.trace != b.trace) return a.trace < b.trace;
      return a.cand < b.cand;
    });
    std::vector<bool> trace_used(open.size(), false), cand_used(cands.size(), false);
    for (const auto& o : options) {
      if (trace_used[o.trace] || cand_used[o.cand]) continue;
      trace_used[o.trace] = cand_used[o.cand] = true;
      open[o.trace].trace.points.push_back({k, seg.bias_values[k], cands[o.cand].freq, cands[o.cand].depth, 1.0});
    }
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (cand_used[c]) continue;
      Open o;
      o.trace.segment = seg_index;
      o.trace.control = seg.control;
      o.trace.points.push_back({k, seg.bias_values[k], cands[c].freq, cands[c].depth, 1.0});
      open.push_back(std::move(o));
    }
    for (auto& o : open)
      if (!o.closed && k - o.trace.last_step() > opt.max_gap) o.closed = true;
  }
  for (auto& o : open)
    if (o.trace.points.size() >= opt.min_points) done.push_back(std::move(o.trace));
  std::sort(done.begin(), done.end(), [](const Trace& a, const Trace& b) {
    if (a.first_step() != b.first_step()) return a.first_step() < b.first_step();
    return a.points.front().freq < b.points.front().freq;
  });
  // Weights: squared dip depth, normalized to unit mean per trace.
  for (auto& t : done) {
    double mean = 0;
    for (const auto& p : t.points) mean += p.depth * p.depth;
    mean /= double(t.points.size());
    for (auto& p : t.points) p.weight = mean > 0 ? p.depth * p.depth / mean : 1.0;
  }
  return done;
}

/// Candidate traces of every segment, in segment order.
inline std::vector<Trace> extract_traces(const SpectroscopyDataset& ds, const ExtractOptions& opt = {}) {
  const double fstep = ds.freq_step();
  std::vector<std::vector<Trace>> per_segment(ds.segments.size());
  parallel_for(ds.segments.size(), opt.threads, [&](std::size_t s) {
    const Segment& seg = ds.segments[s];
    std::vector<std::vector<detail::Candidate>> columns(seg.steps());
    for (std::size_t k = 0; k < seg.steps(); ++k)
      columns[k] = detail::column_candidates(&ds.t1[s][k * ds.n_freq()], ds.freq_axis, fstep, opt);
    per_segment[s] = link_segment(columns, seg, s, fstep, opt);
  });
  std::vector<Trace> out;
  for (auto& v : per_segment)
    for (auto& t : v) out.push_back(std::move(t));
  return out;
}

/// Traces of one TLS followed across consecutive segments.
struct TraceChain {
  std::vector<std::size_t> traces;  // indices into the extracted trace list

  std::size_t n_segments() const { return traces.size(); }
};

/// Joins traces across segment boundaries. Segments start at the bias where
/// the previous one ended, so a TLS visible at the boundary appears at the
/// same frequency at the end of one segment and the start of the next. A
/// trace must reach the boundary (within max_gap steps) and the pair must
/// agree within the jump limit; candidates pair up one-to-one, nearest first.
inline std::vector<TraceChain> link_chains(const SpectroscopyDataset& ds, const std::vector<Trace>& traces,
                                           const ExtractOptions& opt = {}) {
  const double limit = opt.jump_limit * ds.freq_step();
  std::vector<std::ptrdiff_t> next(traces.size(), -1);
  std::vector<bool> has_prev(traces.size(), false);
  for (std::size_t s = 0; s + 1 < ds.segments.size(); ++s) {
    struct Option {
      double err;
      std::size_t a, b;
    };
    std::vector<Option> options;
    const std::size_t last_step = ds.segments[s].steps() - 1;
    for (std::size_t a = 0; a < traces.size(); ++a) {
      if (traces[a].segment != s || last_step - traces[a].last_step() > opt.max_gap) continue;
      for (std::size_t b = 0; b < traces.size(); ++b) {
        if (traces[b].segment != s + 1 || traces[b].first_step() > opt.max_gap) continue;
        const double err = std::abs(traces[a].points.back().freq - traces[b].points.front().freq);
        const double gap = double(last_step - traces[a].last_step() + traces[b].first_step() + 1);
        if (err <= limit * gap) options.push_back({err, a, b});
      }
    }
    std::sort(options.begin(), options.end(), [](const Option& x, const Option& y) {
      if (x.err != y.err) return x.err < y.err;
      if (x.a != y.a) return x.a < y.a;
      return x.b < y.b;
    });
    for (const auto& o : options) {
      if (next[o.a] >= 0 || has_prev[o.b]) continue;
      next[o.a] = static_cast<std::ptrdiff_t>(o.b);
      has_prev[o.b] = true;
    }
  }
  std::vector<TraceChain> chains;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (has_prev[i]) continue;
    TraceChain c;
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i); j >= 0; j = next[std::size_t(j)])
      c.traces.push_back(std::size_t(j));
    chains.push_back(std::move(c));
  }
  return chains;
}

}  // namespace tlsscope
