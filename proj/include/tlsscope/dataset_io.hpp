#pragma once

// Dataset files: long-format CSV plus a `.meta.json` sidecar, and the
// ground-truth JSON written next to generated datasets.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tlsscope/dataset.hpp"
#include "tlsscope/serialize.hpp"

namespace tlsscope {

namespace fs = std::filesystem;

inline constexpr const char* dataset_csv_header = "segment,control,bias_V,freq_GHz,t1_us";

/// data.csv -> data.meta.json
inline fs::path meta_path_for(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

inline std::string format_number(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline json dataset_meta_json(const SpectroscopyDataset& ds) {
  json segs = json::array();
  for (std::size_t i = 0; i < ds.segments.size(); ++i) {
    const Segment& s = ds.segments[i];
    segs.push_back({{"index", i},
                    {"control", std::string(to_string(s.control))},
                    {"direction", std::string(to_string(s.direction))},
                    {"steps", s.steps()},
                    {"base", to_json(s.base)}});
  }
  return {{"schema_version", ds.meta.schema_version},
          {"seed", ds.meta.seed},
          {"qubit", to_json(ds.meta.qubit)},
          {"chain", to_json(ds.meta.chain)},
          {"noise_sigma", ds.meta.noise_sigma},
          {"missing_fraction", ds.meta.missing_fraction},
          {"freq_axis", {{"start_GHz", ds.freq_axis.front()},
                         {"step_GHz", ds.freq_step()},
                         {"count", ds.freq_axis.size()}}},
          {"segments", segs}};
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json_file(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed JSON: " + e.what());
  }
}

/// CSV body. Missing T1 cells are written as empty fields.
inline std::string dataset_csv(const SpectroscopyDataset& ds) {
  std::string out = dataset_csv_header;
  out += '\n';
  std::vector<std::string> freq_text;
  for (double f : ds.freq_axis) freq_text.push_back(format_number(f, 12));
  for (std::size_t s = 0; s < ds.segments.size(); ++s) {
    const Segment& seg = ds.segments[s];
    const std::string prefix = std::to_string(s) + "," + std::string(to_string(seg.control)) + ",";
    for (std::size_t k = 0; k < seg.steps(); ++k) {
      const std::string bias = format_number(seg.bias_values[k], 12);
      for (std::size_t f = 0; f < ds.n_freq(); ++f) {
        out += prefix;
        out += bias;
        out += ',';
        out += freq_text[f];
        out += ',';
        const double t = ds.t1_at(s, k, f);
        if (!std::isnan(t)) out += format_number(t, 10);
        out += '\n';
      }
    }
  }
  return out;
}

inline void write_dataset(const SpectroscopyDataset& ds, const fs::path& csv) {
  write_text(csv, dataset_csv(ds));
  write_text(meta_path_for(csv), dataset_meta_json(ds).dump(2) + "\n");
}

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> f;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      f.push_back(line.substr(start));
      return f;
    }
    f.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace detail

/// Reads a dataset written by write_dataset. Rows must be in segment, step,
/// frequency order; any deviation is reported with its line number.
inline SpectroscopyDataset read_dataset(const fs::path& csv) {
  const json meta = read_json_file(meta_path_for(csv));
  check_schema(meta, meta_path_for(csv).string());

  SpectroscopyDataset ds;
  try {
    check_keys(meta, {"schema_version", "seed", "qubit", "chain", "noise_sigma", "missing_fraction",
                      "freq_axis", "segments"},
               "dataset meta");
    ds.meta.schema_version = meta.at("schema_version").get<int>();
    read_opt(meta, "seed", ds.meta.seed);
    if (meta.contains("qubit")) ds.meta.qubit = qubit_from_json(meta.at("qubit"));
    if (meta.contains("chain")) ds.meta.chain = chain_from_json(meta.at("chain"));
    read_opt(meta, "noise_sigma", ds.meta.noise_sigma);
    read_opt(meta, "missing_fraction", ds.meta.missing_fraction);
    const json& fa = meta.at("freq_axis");
    check_keys(fa, {"start_GHz", "step_GHz", "count"}, "freq_axis");
    const auto n_freq = fa.at("count").get<std::size_t>();
    if (n_freq < 2) throw ConfigError("freq_axis: count < 2");
    ds.freq_axis.resize(n_freq);
    for (const json& js : meta.at("segments")) {
      check_keys(js, {"index", "control", "direction", "steps", "base"}, "segment");
      Segment s;
      s.control = parse_control(js.at("control").get<std::string>());
      const auto dir = js.at("direction").get<std::string>();
      if (dir != "up" && dir != "down") throw ConfigError("segment: bad direction '" + dir + "'");
      s.direction = dir == "up" ? Direction::Up : Direction::Down;
      s.base = bias_from_json(js.at("base"));
      s.bias_values.resize(js.at("steps").get<std::size_t>());
      ds.segments.push_back(std::move(s));
    }
  } catch (const ConfigError& e) {
    throw IoError(meta_path_for(csv).string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw IoError(meta_path_for(csv).string() + ": " + e.what());
  }

  std::ifstream in(csv, std::ios::binary);
  if (!in) throw IoError("cannot open " + csv.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || (line != dataset_csv_header && line != std::string(dataset_csv_header) + "\r"))
    throw IoError(csv.string() + ": line 1: unexpected header");

  const std::size_t nf = ds.n_freq();
  ds.t1.resize(ds.segments.size());
  for (std::size_t s = 0; s < ds.segments.size(); ++s) {
    const Segment& seg = ds.segments[s];
    ds.t1[s].resize(seg.steps() * nf);
    for (std::size_t k = 0; k < seg.steps(); ++k)
      for (std::size_t f = 0; f < nf; ++f) {
        ++line_no;
        auto fail = [&](const std::string& why) {
          throw IoError(csv.string() + ": row " + std::to_string(line_no) + ": " + why);
        };
        if (!std::getline(in, line)) fail("unexpected end of file");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = detail::split_fields(line);
        if (fields.size() != 5) fail("expected 5 fields, found " + std::to_string(fields.size()));
        double seg_idx = 0, bias = 0, freq = 0, t1 = 0;
        if (!detail::parse_double(fields[0], seg_idx) || seg_idx != double(s))
          fail("segment index out of order");
        if (fields[1] != to_string(seg.control)) fail("control does not match metadata");
        if (!detail::parse_double(fields[2], bias)) fail("bad bias value");
        if (!detail::parse_double(fields[3], freq)) fail("bad frequency value");
        if (fields[4].empty()) {
          t1 = std::numeric_limits<double>::quiet_NaN();
        } else if (!detail::parse_double(fields[4], t1) || !(t1 > 0)) {
          fail("bad T1 value");
        }
        if (f == 0) ds.segments[s].bias_values[k] = bias;
        else if (bias != ds.segments[s].bias_values[k]) fail("bias changes within a trace");
        if (s == 0 && k == 0) ds.freq_axis[f] = freq;
        else if (freq != ds.freq_axis[f]) fail("frequency does not match axis");
        ds.t1[s][k * nf + f] = t1;
      }
  }
  ++line_no;
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r")
      throw IoError(csv.string() + ": row " + std::to_string(line_no) + ": extra data");
    ++line_no;
  }
  for (auto& seg : ds.segments) {
    if (seg.steps() >= 2)
      seg.direction = seg.bias_values.back() >= seg.bias_values.front() ? Direction::Up : Direction::Down;
  }
  try {
    ds.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(csv.string() + ": " + e.what());
  }
  return ds;
}

struct GroundTruth {
  std::vector<TlsParams> tls;
  std::vector<CoupledPair> pairs;
};

inline json to_json(const GroundTruth& g) {
  json tls = json::array(), pairs = json::array();
  for (const auto& t : g.tls) tls.push_back(to_json(t));
  for (const auto& p : g.pairs) pairs.push_back(to_json(p));
  return {{"schema_version", schema_version}, {"tls", tls}, {"pairs", pairs}};
}

inline GroundTruth ground_truth_from_json(const json& j) {
  check_schema(j, "ground truth");
  check_keys(j, {"schema_version", "tls", "pairs"}, "ground truth");
  GroundTruth g;
  if (j.contains("tls"))
    for (const auto& t : j.at("tls")) g.tls.push_back(tls_from_json(t));
  if (j.contains("pairs"))
    for (const auto& p : j.at("pairs")) g.pairs.push_back(pair_from_json(p));
  return g;
}

}  // namespace tlsscope
