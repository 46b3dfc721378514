#pragma once

// tls_scope command line: generate, fit, coupled, design, plotdata.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 no traces
// found (without --allow-empty), 5 coupled-fit failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tlsscope/coupled_fit.hpp"
#include "tlsscope/dataset_io.hpp"
#include "tlsscope/ensemble.hpp"
#include "tlsscope/metrics.hpp"
#include "tlsscope/pipeline.hpp"
#include "tlsscope/serialize.hpp"

namespace tlsscope {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_io = 3, exit_empty = 4, exit_coupled = 5 };

/// Thrown by commands to leave with a specific exit code.
struct CliExit : Error {
  int code;
  CliExit(int c, const std::string& what) : Error(what), code(c) {}
};

struct CliContext {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  fs::path out = ".";
  std::optional<std::string> class_filter;
  bool allow_empty = false;
  unsigned threads = 0;
  std::ostream* log = &std::cout;
};

namespace cli {

inline json load_config(const CliContext& ctx) {
  if (!ctx.config) return json::object();
  std::string text;
  try {
    text = read_text(*ctx.config);
  } catch (const IoError& e) {
    throw CliExit(exit_config, e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CliExit(exit_config, ctx.config->string() + ": malformed JSON: " + e.what());
  }
  try {
    check_schema(j, ctx.config->string());
  } catch (const SchemaError& e) {
    throw CliExit(exit_config, e.what());
  }
  return j;
}

inline void ensure_out_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
}

/// Segments listed explicitly: [{control, from_V, to_V, steps, base}].
inline std::vector<Segment> segments_from_json(const json& arr) {
  if (!arr.is_array() || arr.empty()) throw ConfigError("segments: expected a non-empty array");
  std::vector<Segment> out;
  for (const json& j : arr) {
    check_keys(j, {"control", "from_V", "to_V", "steps", "base"}, "segment");
    const Control c = parse_control(j.at("control").get<std::string>());
    BiasPoint base;
    if (j.contains("base")) base = bias_from_json(j.at("base"));
    out.push_back(make_segment(c, base, j.at("from_V").get<double>(), j.at("to_V").get<double>(),
                               j.at("steps").get<std::size_t>()));
  }
  return out;
}

struct GenerateConfig {
  std::uint64_t seed = 1;
  EnsembleConfig ensemble;
  LayoutConfig layout;
  std::optional<std::vector<Segment>> segments;
  double freq_start = 5.5, freq_stop = 6.4, freq_step = 0.002;
  QubitModel qubit;
  ControlChain chain;
  SimulationOptions sim;
  std::vector<TlsParams> extra_tls;
  std::vector<CoupledPair> pairs;
};

inline GenerateConfig parse_generate_config(const json& j) {
  check_keys(j, {"schema_version", "seed", "ensemble", "layout", "segments", "freq", "qubit", "chain",
                 "noise", "tls", "pairs"},
             "generate config");
  GenerateConfig g;
  read_opt(j, "seed", g.seed);
  if (j.contains("ensemble")) g.ensemble = ensemble_config_from_json(j.at("ensemble"));
  if (j.contains("layout")) g.layout = layout_from_json(j.at("layout"));
  if (j.contains("segments")) g.segments = segments_from_json(j.at("segments"));
  if (j.contains("freq")) {
    const json& f = j.at("freq");
    check_keys(f, {"start_GHz", "stop_GHz", "step_GHz"}, "freq");
    read_opt(f, "start_GHz", g.freq_start);
    read_opt(f, "stop_GHz", g.freq_stop);
    read_opt(f, "step_GHz", g.freq_step);
  }
  if (j.contains("qubit")) g.qubit = qubit_from_json(j.at("qubit"));
  if (j.contains("chain")) g.chain = chain_from_json(j.at("chain"));
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, {"sigma", "missing_fraction"}, "noise");
    read_opt(n, "sigma", g.sim.noise_sigma);
    read_opt(n, "missing_fraction", g.sim.missing_fraction);
  }
  if (j.contains("tls"))
    for (const auto& t : j.at("tls")) g.extra_tls.push_back(tls_from_json(t));
  if (j.contains("pairs"))
    for (const auto& p : j.at("pairs")) g.pairs.push_back(pair_from_json(p));
  if (g.sim.noise_sigma < 0 || g.sim.missing_fraction < 0 || g.sim.missing_fraction >= 0.5)
    throw ConfigError("noise: sigma must be >= 0 and missing_fraction in [0, 0.5)");
  return g;
}

/// Builds the dataset and ground truth a generate config describes.
inline std::pair<SpectroscopyDataset, GroundTruth> simulate(const GenerateConfig& g, unsigned threads) {
  GroundTruth truth;
  truth.tls = generate_ensemble(g.ensemble, g.seed).tls_list;
  truth.tls.insert(truth.tls.end(), g.extra_tls.begin(), g.extra_tls.end());
  truth.pairs = g.pairs;
  std::vector<Segment> segs = g.segments ? *g.segments : alternating_layout(g.layout);
  SimulationOptions sim = g.sim;
  sim.seed = g.seed;
  sim.threads = threads;
  QubitModel q = g.qubit;
  SpectroscopyDataset ds = t1_map(truth.tls, truth.pairs, q, std::move(segs),
                                  frequency_axis(g.freq_start, g.freq_stop, g.freq_step), g.chain, sim);
  return {std::move(ds), std::move(truth)};
}

inline int cmd_generate(const CliContext& ctx) {
  const json j = load_config(ctx);
  GenerateConfig g;
  try {
    g = parse_generate_config(j);
  } catch (const json::exception& e) {
    throw CliExit(exit_config, std::string("generate config: ") + e.what());
  }
  if (ctx.seed) g.seed = *ctx.seed;
  auto [ds, truth] = [&] {
    try {
      return simulate(g, resolve_threads(ctx.threads));
    } catch (const InvalidArgument& e) {
      throw CliExit(exit_config, e.what());
    } catch (const InvalidBand& e) {
      throw CliExit(exit_config, e.what());
    } catch (const BiasLimitExceeded& e) {
      throw CliExit(exit_config, e.what());
    }
  }();
  ensure_out_dir(ctx.out);
  write_dataset(ds, ctx.out / "dataset.csv");
  write_text(ctx.out / "ground_truth.json", to_json(truth).dump(2) + "\n");
  *ctx.log << "wrote " << (ctx.out / "dataset.csv").string() << " (" << ds.segments.size() << " segments, "
           << ds.n_freq() << " frequencies, " << truth.tls.size() << " TLS, " << truth.pairs.size()
           << " coupled pairs)\n";
  return exit_ok;
}

inline ExtractOptions extract_from_json(const json& j, ExtractOptions e = {}) {
  check_keys(j, {"threshold", "jump_limit", "max_gap", "min_points", "min_prominence"}, "extract");
  read_opt(j, "threshold", e.threshold);
  read_opt(j, "jump_limit", e.jump_limit);
  read_opt(j, "max_gap", e.max_gap);
  read_opt(j, "min_points", e.min_points);
  read_opt(j, "min_prominence", e.min_prominence);
  if (!(e.threshold > 0 && e.threshold < 1) || !(e.jump_limit > 0) || e.min_points < 5)
    throw ConfigError("extract: threshold in (0, 1), jump_limit > 0, min_points >= 5");
  return e;
}

inline int cmd_fit(const CliContext& ctx, const fs::path& dataset) {
  const json j = load_config(ctx);
  PipelineOptions opt;
  std::optional<Location> filter;
  try {
    check_keys(j, {"schema_version", "extract", "response"}, "fit config");
    if (j.contains("extract")) opt.extract = extract_from_json(j.at("extract"));
    if (j.contains("response")) {
      const json& r = j.at("response");
      check_keys(r, {"span_steps", "n_sigma", "max_residual_steps"}, "response");
      read_opt(r, "span_steps", opt.span_steps);
      read_opt(r, "n_sigma", opt.n_sigma);
      read_opt(r, "max_residual_steps", opt.max_residual_steps);
    }
    if (ctx.class_filter) filter = parse_location(*ctx.class_filter);
  } catch (const json::exception& e) {
    throw CliExit(exit_config, std::string("fit config: ") + e.what());
  }
  opt.threads = resolve_threads(ctx.threads);
  const SpectroscopyDataset ds = read_dataset(dataset);
  const FitReport rep = analyze_dataset(ds, opt);
  if (rep.tls.empty() && !ctx.allow_empty)
    throw CliExit(exit_empty, "no TLS traces found in " + dataset.string() + " (use --allow-empty to accept)");
  ensure_out_dir(ctx.out);
  write_text(ctx.out / "fit_report.json", to_json(rep, filter).dump(2) + "\n");
  write_text(ctx.out / "material_report.txt", to_text(rep.material));
  *ctx.log << "found " << rep.tls.size() << " TLS in " << rep.n_traces << " traces; report in "
           << (ctx.out / "fit_report.json").string() << "\n";
  return exit_ok;
}

/// Model transitions along every panel, for plotting against the data.
inline json panel_curves(const CoupledPair& model, const CrossingPanel& panel) {
  json bias = json::array(), t1 = json::array(), t2 = json::array();
  json obs_bias = json::array(), obs_freq = json::array();
  auto [lo, hi] = std::minmax_element(panel.bias.begin(), panel.bias.end());
  const std::size_t steps = 201;
  for (std::size_t i = 0; i < steps; ++i) {
    const double v = *lo + (*hi - *lo) * double(i) / double(steps - 1);
    const auto t = detail::pair_transitions(model, with_bias(panel.base, panel.control, v));
    bias.push_back(v);
    t1.push_back(t[0]);
    t2.push_back(t[1]);
  }
  for (std::size_t i = 0; i < panel.bias.size(); ++i) {
    obs_bias.push_back(panel.bias[i]);
    obs_freq.push_back(panel.freq[i]);
  }
  return {{"control", std::string(to_string(panel.control))},
          {"base", to_json(panel.base)},
          {"observed", {{"bias_V", obs_bias}, {"freq_GHz", obs_freq}}},
          {"model", {{"bias_V", bias}, {"transition1_GHz", t1}, {"transition2_GHz", t2}}}};
}

inline int cmd_coupled(const CliContext& ctx) {
  if (!ctx.config) throw CliExit(exit_config, "coupled: --config is required");
  const json j = load_config(ctx);
  TlsParams tls1, tls2;
  CoupledFitOptions fo;
  ExtractOptions eo;
  std::vector<fs::path> datasets;
  try {
    check_keys(j, {"schema_version", "tls1", "tls2", "basis", "datasets", "extract"}, "coupled config");
    if (!j.contains("tls1") || !j.contains("tls2") || !j.contains("datasets"))
      throw ConfigError("coupled config: tls1, tls2 and datasets are required");
    tls1 = tls_from_json(j.at("tls1"));
    tls2 = tls_from_json(j.at("tls2"));
    std::string basis = "localized";
    read_opt(j, "basis", basis);
    if (basis == "eigenbasis") fo.basis = CouplingBasis::Eigenbasis;
    else if (basis != "localized") throw ConfigError("coupled config: basis must be 'localized' or 'eigenbasis'");
    if (j.contains("extract")) eo = extract_from_json(j.at("extract"));
    for (const auto& p : j.at("datasets")) {
      fs::path path = p.get<std::string>();
      if (path.is_relative()) path = ctx.config->parent_path() / path;
      datasets.push_back(path);
    }
  } catch (const json::exception& e) {
    throw CliExit(exit_config, std::string("coupled config: ") + e.what());
  }
  eo.threads = resolve_threads(ctx.threads);
  std::vector<CrossingPanel> panels;
  for (const auto& path : datasets) {
    const SpectroscopyDataset ds = read_dataset(path);
    const auto traces = extract_traces(ds, eo);
    for (std::size_t s = 0; s < ds.segments.size(); ++s) {
      CrossingPanel p = panel_from_traces(ds, traces, s);
      if (!p.bias.empty()) panels.push_back(std::move(p));
    }
  }
  CoupledFitResult res;
  try {
    res = fit_coupled_pair(panels, tls1, tls2, fo);
  } catch (const AmbiguousSigns& e) {
    throw CliExit(exit_coupled, e.what());
  } catch (const NoConvergence& e) {
    throw CliExit(exit_coupled, e.what());
  } catch (const InvalidArgument& e) {
    throw CliExit(exit_coupled, e.what());
  }
  TlsParams fitted2 = tls2;
  fitted2.gamma_p = res.gamma_p2;
  const CoupledPair model{tls1, fitted2, fo.basis, res.g_z, res.g_x};
  json curves = json::array(), branches = json::array();
  for (const auto& p : panels) curves.push_back(panel_curves(model, p));
  for (const auto& b : res.branches)
    branches.push_back({{"g_z_MHz", b[0]}, {"g_x_MHz", b[1]}, {"gamma_p2_GHz_per_V", b[2]}, {"rss", b[3]}});
  const json out = {{"schema_version", schema_version},
                    {"basis", fo.basis == CouplingBasis::Localized ? "localized" : "eigenbasis"},
                    {"g_z_MHz", res.g_z},
                    {"g_x_MHz", res.g_x},
                    {"gamma_p2_GHz_per_V", res.gamma_p2},
                    {"sigma", {{"g_z_MHz", res.sigma(0)}, {"g_x_MHz", res.sigma(1)}, {"gamma_p2_GHz_per_V", res.sigma(2)}}},
                    {"covariance", res.covariance},
                    {"rss", res.rss},
                    {"iterations", res.iterations},
                    {"sign_branches", branches},
                    {"panels", curves}};
  ensure_out_dir(ctx.out);
  write_text(ctx.out / "coupled_fit.json", out.dump(2) + "\n");
  *ctx.log << "g_z = " << res.g_z << " MHz, g_x = " << res.g_x << " MHz, gamma_p2 = " << res.gamma_p2
           << " GHz/V\n";
  return exit_ok;
}

struct DesignConfig {
  SensorDesign design;
  double p_min = 0.1;             // e*A
  double tan_delta0 = 1.6e-3;
  double gamma_background = 0.1;  // 1/us
};

struct DesignReport {
  double v_rms_uV = 0, d_nm = 0, c_s_fF = 0, p_s = 0, field = 0;
  RelaxationBudget budget;
  std::vector<std::string> warnings;
};

inline DesignReport evaluate_design(const DesignConfig& c) {
  c.design.validate();
  if (!(c.p_min > 0) || c.tan_delta0 < 0 || c.gamma_background < 0)
    throw InvalidArgument("design: p_min must be > 0, tan_delta0 and gamma_background >= 0");
  DesignReport r;
  r.v_rms_uV = vacuum_voltage(c.design);
  r.d_nm = design_thickness(c.p_min, c.design.t1_qubit_us, r.v_rms_uV);
  r.c_s_fF = sample_capacitance(c.design);
  r.p_s = participation_ratio(c.design);
  r.field = sample_field_rms(c.design);
  r.budget = relaxation_budget(c.design, c.tan_delta0, c.gamma_background);
  r.warnings = design_warnings(c.design);
  return r;
}

inline std::string design_text(const DesignConfig& c, const DesignReport& r) {
  std::string out;
  char buf[160];
  auto line = [&](const char* name, double v, const char* unit) {
    std::snprintf(buf, sizeof buf, "%-32s %14.6g  %s\n", name, v, unit);
    out += buf;
  };
  line("vacuum voltage V_rms", r.v_rms_uV, "uV");
  line("thickness for p_min", r.d_nm, "nm");
  line("sample capacitance C_s", r.c_s_fF, "fF");
  line("participation ratio p_s", r.p_s, "");
  line("rms field in dielectric", r.field, "V/m");
  line("tan delta0", c.tan_delta0, "");
  line("Gamma_1,0", c.gamma_background, "1/us");
  line("Gamma dielectric", r.budget.gamma_dielectric, "1/us");
  line("Gamma_1", r.budget.gamma1, "1/us");
  line("T_1", 1.0 / r.budget.gamma1, "us");
  if (r.budget.dielectric_limited) out += "note: sample dielectric limits T1 (Gamma dielectric > Gamma_1,0)\n";
  for (const auto& w : r.warnings) out += "warning: " + w + "\n";
  return out;
}

inline int cmd_design(const CliContext& ctx) {
  const json j = load_config(ctx);
  DesignConfig c;
  try {
    check_keys(j, {"schema_version", "design", "p_min_eA", "tan_delta0", "gamma_background"}, "design config");
    if (j.contains("design")) c.design = design_from_json(j.at("design"));
    read_opt(j, "p_min_eA", c.p_min);
    read_opt(j, "tan_delta0", c.tan_delta0);
    read_opt(j, "gamma_background", c.gamma_background);
  } catch (const json::exception& e) {
    throw CliExit(exit_config, std::string("design config: ") + e.what());
  }
  DesignReport r;
  try {
    r = evaluate_design(c);
  } catch (const InvalidArgument& e) {
    throw CliExit(exit_config, e.what());
  }
  const std::string text = design_text(c, r);
  *ctx.log << text;
  if (ctx.config || ctx.out != fs::path(".")) {
    ensure_out_dir(ctx.out);
    const json out = {{"schema_version", schema_version},
                      {"design", to_json(c.design)},
                      {"p_min_eA", c.p_min},
                      {"v_rms_uV", r.v_rms_uV},
                      {"d_nm", r.d_nm},
                      {"c_s_fF", r.c_s_fF},
                      {"participation_ratio", r.p_s},
                      {"field_V_per_m", r.field},
                      {"tan_delta0", c.tan_delta0},
                      {"gamma_background", c.gamma_background},
                      {"gamma_dielectric", r.budget.gamma_dielectric},
                      {"gamma1", r.budget.gamma1},
                      {"dielectric_limited", r.budget.dielectric_limited},
                      {"warnings", r.warnings}};
    write_text(ctx.out / "design_report.json", out.dump(2) + "\n");
  }
  return exit_ok;
}

inline int cmd_plotdata(const CliContext& ctx, const std::string& kind, const fs::path& input) {
  std::string out;
  fs::path file;
  if (kind == "t1-map") {
    const SpectroscopyDataset ds = read_dataset(input);
    out = "segment,step,control,bias_V,freq_GHz,t1_us\n";
    for (std::size_t s = 0; s < ds.segments.size(); ++s)
      for (std::size_t k = 0; k < ds.segments[s].steps(); ++k)
        for (std::size_t f = 0; f < ds.n_freq(); ++f) {
          const double t = ds.t1_at(s, k, f);
          out += std::to_string(s) + "," + std::to_string(k) + "," + std::string(to_string(ds.segments[s].control)) +
                 "," + format_number(ds.segments[s].bias_values[k], 12) + "," + format_number(ds.freq_axis[f], 12) +
                 "," + (std::isnan(t) ? std::string() : format_number(t, 10)) + "\n";
        }
    file = "t1_map.csv";
  } else if (kind == "crossing") {
    const json j = read_json_file(input);
    check_schema(j, input.string());
    if (!j.contains("panels")) throw IoError(input.string() + ": not a coupled-fit result");
    out = "panel,bias_V,transition1_GHz,transition2_GHz,model1_GHz,model2_GHz\n";
    std::size_t idx = 0;
    for (const auto& p : j.at("panels")) {
      const CrossingPanel panel{bias_from_json(p.at("base")), parse_control(p.at("control").get<std::string>()),
                                p.at("observed").at("bias_V").get<std::vector<double>>(),
                                p.at("observed").at("freq_GHz").get<std::vector<double>>(),
                                {}};
      // Observed points grouped per bias, lower and upper transition.
      std::map<double, std::vector<double>> by_bias;
      for (std::size_t i = 0; i < panel.bias.size(); ++i) by_bias[panel.bias[i]].push_back(panel.freq[i]);
      const auto mb = p.at("model").at("bias_V").get<std::vector<double>>();
      const auto m1 = p.at("model").at("transition1_GHz").get<std::vector<double>>();
      const auto m2 = p.at("model").at("transition2_GHz").get<std::vector<double>>();
      for (auto& [v, fs_] : by_bias) {
        std::sort(fs_.begin(), fs_.end());
        // Model at the nearest tabulated bias.
        std::size_t best = 0;
        for (std::size_t i = 1; i < mb.size(); ++i)
          if (std::abs(mb[i] - v) < std::abs(mb[best] - v)) best = i;
        out += std::to_string(idx) + "," + format_number(v, 12) + "," + format_number(fs_.front(), 12) + "," +
               (fs_.size() > 1 ? format_number(fs_.back(), 12) : std::string()) + "," + format_number(m1[best], 12) +
               "," + format_number(m2[best], 12) + "\n";
      }
      ++idx;
    }
    file = "crossing.csv";
  } else if (kind == "dipole-histogram") {
    const json j = read_json_file(input);
    check_schema(j, input.string());
    if (!j.contains("tls")) throw IoError(input.string() + ": not a fit report");
    const double width = 0.1;
    std::map<long, std::size_t> bins;
    for (const auto& t : j.at("tls")) {
      if (!t.contains("p_parallel_eA") || t.at("p_parallel_eA").is_null()) continue;
      bins[static_cast<long>(std::floor(t.at("p_parallel_eA").get<double>() / width))]++;
    }
    out = "bin_lo_eA,bin_hi_eA,count\n";
    if (!bins.empty())
      for (long b = 0; b <= bins.rbegin()->first; ++b) {
        const auto it = bins.find(b);
        out += format_number(b * width, 6) + "," + format_number((b + 1) * width, 6) + "," +
               std::to_string(it == bins.end() ? 0 : it->second) + "\n";
      }
    file = "dipole_histogram.csv";
  } else {
    throw CliExit(exit_config, "plotdata: unknown kind '" + kind + "' (t1-map, crossing, dipole-histogram)");
  }
  ensure_out_dir(ctx.out);
  write_text(ctx.out / file, out);
  *ctx.log << "wrote " << (ctx.out / file).string() << "\n";
  return exit_ok;
}

}  // namespace cli

/// Entry point of the tls_scope tool; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& log = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"tls_scope: synthetic swap spectroscopy and TLS analysis"};
  app.require_subcommand(1);
  CliContext ctx;
  ctx.log = &log;
  std::string config, out = ".", class_filter;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "configuration file (JSON)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads (default: TLS_SCOPE_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* gen = app.add_subcommand("generate", "simulate a swap-spectroscopy dataset");
  add_common(gen);
  std::string dataset;
  CLI::App* fit = app.add_subcommand("fit", "extract, fit and classify TLS in a dataset");
  add_common(fit);
  fit->add_option("dataset", dataset, "dataset CSV")->required();
  fit->add_option("--class-filter", class_filter, "report only this class (sample, junction, surface, ...)");
  fit->add_flag("--allow-empty", ctx.allow_empty, "succeed when no TLS is found");
  CLI::App* coupled = app.add_subcommand("coupled", "fit the coupling of an interacting TLS pair");
  add_common(coupled);
  CLI::App* design = app.add_subcommand("design", "evaluate sensor design rules");
  add_common(design);
  std::string kind, input;
  CLI::App* plot = app.add_subcommand("plotdata", "export columnar plot data");
  add_common(plot);
  plot->add_option("kind", kind, "t1-map | crossing | dipole-histogram")->required();
  plot->add_option("input", input, "dataset CSV or result JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? exit_ok : exit_config;
  }
  if (!config.empty()) ctx.config = fs::path(config);
  for (CLI::App* sub : {gen, fit, coupled, design, plot})
    if (sub->count("--seed")) ctx.seed = seed;
  ctx.out = out;
  if (!class_filter.empty()) ctx.class_filter = class_filter;
  ctx.threads = threads;

  try {
    if (*gen) return cli::cmd_generate(ctx);
    if (*fit) return cli::cmd_fit(ctx, dataset);
    if (*coupled) return cli::cmd_coupled(ctx);
    if (*design) return cli::cmd_design(ctx);
    if (*plot) return cli::cmd_plotdata(ctx, kind, input);
  } catch (const CliExit& e) {
    err << "error: " << e.what() << "\n";
    return e.code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  }
  return exit_config;
}

}  // namespace tlsscope
