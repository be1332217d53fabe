#pragma once

// YAML configuration loading. Errors carry the line and column of the
// offending node. See configs/ for annotated examples.

#include <tripod/errors.hpp>
#include <tripod/propagator.hpp>
#include <tripod/pulses.hpp>
#include <tripod/scan.hpp>

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

namespace tripod {

namespace config_detail {

inline std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) return "";
  return std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) + ": ";
}

[[noreturn]] inline void fail(const YAML::Node& n, const std::string& path,
                              const std::string& msg) {
  throw ConfigError(where(n) + path + ": " + msg);
}

inline void require_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) fail(n, path, "expected a mapping");
}

inline void allow_keys(const YAML::Node& n, const std::string& path,
                       std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, path, "unknown key '" + key + "'");
  }
}

inline double get_double(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, path, "expected a number");
  double v = 0.0;
  if (!YAML::convert<double>::decode(n, v) || !std::isfinite(v)) {
    fail(n, path, "expected a finite number, got '" + n.Scalar() + "'");
  }
  return v;
}

inline double get_double(const YAML::Node& parent, const char* key, const std::string& path,
                         double fallback) {
  const YAML::Node n = parent[key];
  return n ? get_double(n, path + "." + key) : fallback;
}

inline double require_double(const YAML::Node& parent, const char* key,
                             const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) fail(parent, path, std::string("missing required key '") + key + "'");
  return get_double(n, path + "." + key);
}

inline std::size_t get_count(const YAML::Node& n, const std::string& path) {
  const double v = get_double(n, path);
  if (v < 1.0 || v != std::floor(v) || v > 1e9) fail(n, path, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

inline std::string get_string(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(n, path, "expected a string");
  return n.Scalar();
}

inline bool get_bool(const YAML::Node& n, const std::string& path) {
  bool v = false;
  if (!n.IsScalar() || !YAML::convert<bool>::decode(n, v)) fail(n, path, "expected true/false");
  return v;
}

inline std::pair<double, double> get_range(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != 2) fail(n, path, "expected [min, max]");
  return {get_double(n[0], path + "[0]"), get_double(n[1], path + "[1]")};
}

inline Envelope parse_envelope(const YAML::Node& n, const std::string& path) {
  require_map(n, path);
  allow_keys(n, path, {"center", "width"});
  Envelope e;
  e.center = get_double(n, "center", path, 0.0);
  e.width = get_double(n, "width", path, 1.0);
  if (!(e.width > 0.0)) fail(n, path + ".width", "must be > 0");
  return e;
}

inline PulseShape parse_pulse(const YAML::Node& n, const std::string& path, double width_factor,
                              const std::optional<Envelope>& envelope) {
  require_map(n, path);
  const YAML::Node shape_node = n["shape"];
  const std::string shape = shape_node ? get_string(shape_node, path + ".shape") : "gaussian";
  const double gamma = require_double(n, "gamma", path);
  if (gamma < 0.0) fail(n["gamma"], path + ".gamma", "must be >= 0");

  if (shape == "gaussian") {
    allow_keys(n, path, {"shape", "gamma", "center", "width"});
    const double width = get_double(n, "width", path, 1.0);
    if (!(width > 0.0)) fail(n["width"], path + ".width", "must be > 0");
    return Gaussian{gamma, get_double(n, "center", path, 0.0), width_factor * width};
  }
  if (shape == "constant") {
    allow_keys(n, path, {"shape", "gamma"});
    return Constant{gamma};
  }
  if (shape == "shared") {
    allow_keys(n, path, {"shape", "gamma"});
    if (!envelope) fail(n, path, "shape 'shared' needs pulses.envelope");
    return SharedEnvelope{gamma, *envelope};
  }
  fail(shape_node, path + ".shape", "expected gaussian, constant or shared, got '" + shape + "'");
}

inline FanoParams parse_fano(const YAML::Node& n) {
  require_map(n, "fano");
  allow_keys(n, "fano", {"q12", "q13", "q23"});
  return {require_double(n, "q12", "fano"), require_double(n, "q13", "fano"),
          require_double(n, "q23", "fano")};
}

inline DetuningPolicy parse_detuning(const YAML::Node& n) {
  require_map(n, "detuning");
  allow_keys(n, "detuning", {"policy", "delta1", "delta2"});
  const YAML::Node p = n["policy"];
  const std::string policy = p ? get_string(p, "detuning.policy") : "auto-trap";
  if (policy == "auto-trap") {
    if (n["delta1"] || n["delta2"]) fail(n, "detuning", "auto-trap takes no delta1/delta2");
    return AutoTrap{};
  }
  if (policy == "static") {
    return StaticDetuning{get_double(n, "delta1", "detuning", 0.0),
                          get_double(n, "delta2", "detuning", 0.0)};
  }
  fail(p, "detuning.policy", "expected auto-trap or static, got '" + policy + "'");
}

inline GridSettings parse_grid(const YAML::Node& n) {
  require_map(n, "grid");
  allow_keys(n, "grid", {"span_widths", "t0", "t1", "tol", "samples"});
  GridSettings g;
  g.span_widths = get_double(n, "span_widths", "grid", g.span_widths);
  if (!(g.span_widths > 0.0)) fail(n["span_widths"], "grid.span_widths", "must be > 0");
  if (n["t0"]) g.t0 = get_double(n["t0"], "grid.t0");
  if (n["t1"]) g.t1 = get_double(n["t1"], "grid.t1");
  if (g.t0.has_value() != g.t1.has_value()) fail(n, "grid", "t0 and t1 must be given together");
  if (g.t0 && !(*g.t0 < *g.t1)) fail(n, "grid", "requires t0 < t1");
  g.tol = get_double(n, "tol", "grid", g.tol);
  if (!(g.tol > 0.0)) fail(n["tol"], "grid.tol", "must be > 0");
  if (n["samples"]) g.samples = get_count(n["samples"], "grid.samples");
  return g;
}

inline ScanSettings parse_scan(const YAML::Node& n) {
  require_map(n, "scan");
  allow_keys(n, "scan", {"area", "width", "detuning"});
  ScanSettings s;
  if (const YAML::Node a = n["area"]) {
    const std::string path = "scan.area";
    require_map(a, path);
    allow_keys(a, path, {"min", "max", "steps", "numeric_check"});
    AreaScan v;
    v.area_min = get_double(a, "min", path, v.area_min);
    v.area_max = get_double(a, "max", path, v.area_max);
    if (a["steps"]) v.steps = get_count(a["steps"], path + ".steps");
    if (a["numeric_check"]) v.numeric_check = get_bool(a["numeric_check"], path + ".numeric_check");
    if (v.area_min < 0.0 || !(v.area_min < v.area_max) || v.steps < 2) {
      fail(a, path, "need 0 <= min < max and steps >= 2");
    }
    s.area = v;
  }
  if (const YAML::Node w = n["width"]) {
    const std::string path = "scan.width";
    require_map(w, path);
    allow_keys(w, path, {"min", "max", "steps", "delay_ratio"});
    WidthScan v;
    v.width_min = get_double(w, "min", path, v.width_min);
    v.width_max = get_double(w, "max", path, v.width_max);
    if (w["steps"]) v.steps = get_count(w["steps"], path + ".steps");
    v.delay_ratio = get_double(w, "delay_ratio", path, v.delay_ratio);
    if (!(v.width_min > 0.0) || !(v.width_min < v.width_max) || v.steps < 2) {
      fail(w, path, "need 0 < min < max and steps >= 2");
    }
    s.width = v;
  }
  if (const YAML::Node d = n["detuning"]) {
    const std::string path = "scan.detuning";
    require_map(d, path);
    allow_keys(d, path, {"sum", "diff", "steps", "gamma3"});
    DetuningGrid v;
    if (d["sum"]) std::tie(v.sum_min, v.sum_max) = get_range(d["sum"], path + ".sum");
    if (d["diff"]) std::tie(v.diff_min, v.diff_max) = get_range(d["diff"], path + ".diff");
    if (const YAML::Node st = d["steps"]) {
      if (st.IsSequence()) {
        if (st.size() != 2) fail(st, path + ".steps", "expected n or [n_sum, n_diff]");
        v.sum_steps = get_count(st[0], path + ".steps[0]");
        v.diff_steps = get_count(st[1], path + ".steps[1]");
      } else {
        v.sum_steps = v.diff_steps = get_count(st, path + ".steps");
      }
    }
    if (const YAML::Node g = d["gamma3"]) {
      if (!g.IsSequence() || g.size() == 0) fail(g, path + ".gamma3", "expected a nonempty list");
      v.gamma3.clear();
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = get_double(g[k], path + ".gamma3[" + std::to_string(k) + "]");
        if (x < 0.0) fail(g[k], path + ".gamma3", "must be >= 0");
        v.gamma3.push_back(x);
      }
    }
    if (!(v.sum_min < v.sum_max) || !(v.diff_min < v.diff_max) || v.sum_steps < 2 ||
        v.diff_steps < 2) {
      fail(d, path, "need min < max and steps >= 2 on both axes");
    }
    s.detuning = v;
  }
  return s;
}

}  // namespace config_detail

/// Parses a configuration from YAML text. Throws ConfigError.
inline SystemConfig parse_config(const std::string& text) {
  using namespace config_detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError("1:1: top level: expected a mapping");
  allow_keys(root, "top level",
             {"units", "fano", "pulses", "detuning", "grid", "initial_state", "scan"});

  SystemConfig c;
  if (const YAML::Node u = root["units"]) {
    require_map(u, "units");
    allow_keys(u, "units", {"rate", "time"});
    if (u["rate"] && get_string(u["rate"], "units.rate") != "gamma0") {
      fail(u["rate"], "units.rate", "only 'gamma0' is supported");
    }
    if (u["time"] && get_string(u["time"], "units.time") != "1/gamma0") {
      fail(u["time"], "units.time", "only '1/gamma0' is supported");
    }
  }

  const YAML::Node fano = root["fano"];
  if (!fano) fail(root, "top level", "missing required key 'fano'");
  c.fano = parse_fano(fano);

  const YAML::Node pulses = root["pulses"];
  if (!pulses) fail(root, "top level", "missing required key 'pulses'");
  require_map(pulses, "pulses");
  allow_keys(pulses, "pulses", {"width_factor", "envelope", "pump", "stokes", "control"});
  c.width_factor = get_double(pulses, "width_factor", "pulses", 1.0);
  if (!(c.width_factor > 0.0)) fail(pulses["width_factor"], "pulses.width_factor", "must be > 0");
  std::optional<Envelope> envelope;
  if (pulses["envelope"]) envelope = parse_envelope(pulses["envelope"], "pulses.envelope");
  for (const char* name : {"pump", "stokes", "control"}) {
    if (!pulses[name]) fail(pulses, "pulses", std::string("missing required key '") + name + "'");
  }
  c.pulses.pump = parse_pulse(pulses["pump"], "pulses.pump", c.width_factor, envelope);
  c.pulses.stokes = parse_pulse(pulses["stokes"], "pulses.stokes", c.width_factor, envelope);
  c.pulses.control = parse_pulse(pulses["control"], "pulses.control", c.width_factor, envelope);

  if (const YAML::Node d = root["detuning"]) c.policy = parse_detuning(d);
  if (const YAML::Node g = root["grid"]) c.grid = parse_grid(g);
  if (const YAML::Node i = root["initial_state"]) {
    const double k = get_double(i, "initial_state");
    if (k != 1.0 && k != 2.0 && k != 3.0) fail(i, "initial_state", "must be 1, 2 or 3");
    c.initial_state = static_cast<int>(k);
  }
  if (const YAML::Node s = root["scan"]) c.scan = parse_scan(s);

  validate(c);
  return c;
}

/// Loads a configuration file. Throws ConfigError with "path:line:col: ...".
inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ":" + e.what());
  }
}

}  // namespace tripod
