#pragma once

// Experiment description, parameter scans and CSV output.

#include <tripod/analytic.hpp>
#include <tripod/core_model.hpp>
#include <tripod/errors.hpp>
#include <tripod/propagator.hpp>
#include <tripod/pulses.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cstddef>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <thread>
#include <utility>
#include <vector>

namespace tripod {

struct GridSettings {
  /// Window half-width in units of the widest Gaussian beyond the outermost centre.
  double span_widths = 6.0;
  /// Explicit window; required when every pulse is constant.
  std::optional<double> t0;
  std::optional<double> t1;
  double tol = 1e-10;
  std::size_t samples = 512;
};

struct AreaScan {
  double area_min = 0.0;
  double area_max = 10.0;
  std::size_t steps = 101;
  bool numeric_check = false;
};

struct WidthScan {
  double width_min = 0.05;
  double width_max = 10.0;
  std::size_t steps = 200;
  /// Pump centred at +delay_ratio*T, Stokes at -delay_ratio*T.
  double delay_ratio = 0.5;
};

struct DetuningGrid {
  double sum_min = -2.0;
  double sum_max = 14.0;
  double diff_min = -6.0;
  double diff_max = 6.0;
  std::size_t sum_steps = 121;
  std::size_t diff_steps = 121;
  std::vector<double> gamma3 = {0.0, 1.0, 4.0};
};

struct ScanSettings {
  std::optional<AreaScan> area;
  std::optional<WidthScan> width;
  std::optional<DetuningGrid> detuning;
};

struct SystemConfig {
  FanoParams fano;
  PulseTriple pulses;
  DetuningPolicy policy = AutoTrap{};
  GridSettings grid;
  int initial_state = 1;
  /// Gaussian 1/e half-width per unit of nominal width T. Pulses in
  /// `pulses` already carry the scaled width; scans rebuild them with it.
  double width_factor = 1.0;
  ScanSettings scan;
};

inline void validate(const SystemConfig& c) {
  if (!c.fano.all_finite()) throw ConfigError("fano: parameters must be finite");
  for (const PulseShape* s : {&c.pulses.pump, &c.pulses.stokes, &c.pulses.control}) {
    if (!(peak_rate(*s) >= 0.0)) throw ConfigError("pulses: gamma must be >= 0");
    if (const auto* g = std::get_if<Gaussian>(s); g && !(g->width > 0.0)) {
      throw ConfigError("pulses: gaussian width must be > 0");
    }
    if (const auto* e = std::get_if<SharedEnvelope>(s); e && !(e->envelope.width > 0.0)) {
      throw ConfigError("pulses: envelope width must be > 0");
    }
  }
  if (c.initial_state < 1 || c.initial_state > 3) {
    throw ConfigError("initial_state: must be 1, 2 or 3");
  }
  if (!(c.grid.tol > 0.0)) throw ConfigError("grid.tol: must be > 0");
  if (!(c.width_factor > 0.0)) throw ConfigError("pulses.width_factor: must be > 0");
  if (c.grid.t0.has_value() != c.grid.t1.has_value()) {
    throw ConfigError("grid: t0 and t1 must be given together");
  }
  if (c.grid.t0 && !(*c.grid.t0 < *c.grid.t1)) throw ConfigError("grid: requires t0 < t1");
  if (const auto& a = c.scan.area) {
    if (a->steps < 2 || !(a->area_min < a->area_max) || a->area_min < 0.0) {
      throw ConfigError("scan.area: need 0 <= min < max and steps >= 2");
    }
  }
  if (const auto& w = c.scan.width) {
    if (w->steps < 2 || !(w->width_min < w->width_max) || !(w->width_min > 0.0)) {
      throw ConfigError("scan.width: need 0 < min < max and steps >= 2");
    }
  }
  if (const auto& d = c.scan.detuning) {
    if (d->sum_steps < 2 || d->diff_steps < 2 || !(d->sum_min < d->sum_max) ||
        !(d->diff_min < d->diff_max) || d->gamma3.empty()) {
      throw ConfigError("scan.detuning: need nonempty ranges, steps >= 2 and a gamma3 list");
    }
  }
}

/// Propagation window and sampling for the given pulses.
inline PropagationGrid make_grid(const GridSettings& g, const PulseTriple& pulses) {
  PropagationGrid grid;
  grid.tol = g.tol;
  grid.samples = g.samples;
  if (g.t0 && g.t1) {
    grid.t0 = *g.t0;
    grid.t1 = *g.t1;
    return grid;
  }
  double span = 0.0;
  bool found = false;
  for (const PulseShape* s : {&pulses.pump, &pulses.stokes, &pulses.control}) {
    if (const auto* p = std::get_if<Gaussian>(s)) {
      span = std::max(span, std::abs(p->center) + g.span_widths * p->width);
      found = true;
    } else if (const auto* e = std::get_if<SharedEnvelope>(s)) {
      span = std::max(span, std::abs(e->envelope.center) + g.span_widths * e->envelope.width);
      found = true;
    }
  }
  if (!found) throw ConfigError("grid: all pulses are constant; set grid.t0 and grid.t1");
  grid.t0 = -span;
  grid.t1 = span;
  return grid;
}

inline Trajectory run_propagate(const SystemConfig& c) {
  validate(c);
  return propagate(c.fano, c.pulses, c.policy, AmplitudeVector::basis(c.initial_state),
                   make_grid(c.grid, c.pulses));
}

/// Final populations only: a single record at the end of the window.
inline Populations final_populations(const FanoParams& q, const PulseTriple& pulses,
                                     const DetuningPolicy& policy, int initial_state,
                                     const GridSettings& settings) {
  PropagationGrid grid = make_grid(settings, pulses);
  grid.sample_times = {grid.t1};
  const Trajectory traj =
      propagate(q, pulses, policy, AmplitudeVector::basis(initial_state), grid);
  const auto& r = traj.final();
  return {r.p1, r.p2, r.p3, r.pi};
}

// ---------------------------------------------------------------------------

/// Applies f to indices [0, n) on up to `workers` threads. Results keep index
/// order; if several items throw, the lowest-index exception is rethrown.
template <class F>
auto parallel_map(std::size_t n, std::size_t workers, F&& f)
    -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct ScanTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
};

inline double linspace_at(double lo, double hi, std::size_t steps, std::size_t k) {
  if (k + 1 == steps) return hi;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
}

/// Closed-form coincident populations for an atom starting in psi_k: the
/// initial state takes the role of psi1 in the formula.
inline Populations coincident_for_initial(std::array<double, 3> weights, double q, double area,
                                          int initial_state) {
  const int k = initial_state - 1;
  const int o1 = k == 0 ? 1 : 0;
  const int o2 = k == 2 ? 1 : 2;
  const Populations p =
      coincident_populations({weights[k], weights[o1], weights[o2], q, area});
  std::array<double, 3> out{};
  out[k] = p.p1;
  out[o1] = p.p2;
  out[o2] = p.p3;
  return {out[0], out[1], out[2], p.pi};
}

/// Unit-peak envelope used for coincident pulses: taken from the config if it
/// already uses a shared envelope, else centred at 0 with unit width.
inline Envelope coincident_envelope(const SystemConfig& c) {
  for (const PulseShape* s : {&c.pulses.pump, &c.pulses.stokes, &c.pulses.control}) {
    if (const auto* e = std::get_if<SharedEnvelope>(s)) return e->envelope;
  }
  return {};
}

/// Pulses with relative weights `weights`, a shared envelope and total area A.
inline PulseTriple coincident_pulses(std::array<double, 3> weights, const Envelope& env,
                                     double area) {
  const double sum = weights[0] + weights[1] + weights[2];
  const double scale = area / (sum * env.area());
  return {SharedEnvelope{weights[0] * scale, env}, SharedEnvelope{weights[1] * scale, env},
          SharedEnvelope{weights[2] * scale, env}};
}

inline ScanTable run_area_scan(const SystemConfig& c, const AreaScan& s, std::size_t workers = 1) {
  validate(c);
  const FanoParams& q = c.fano;
  if (std::abs(q.q12 - q.q13) > kFanoEpsilon || std::abs(q.q13 - q.q23) > kFanoEpsilon) {
    throw ConfigError("scan.area: the closed form needs q12 = q13 = q23");
  }
  const std::array<double, 3> w = {peak_rate(c.pulses.pump), peak_rate(c.pulses.stokes),
                                   peak_rate(c.pulses.control)};
  if (!(w[0] + w[1] + w[2] > 0.0)) throw ConfigError("scan.area: pulse weights sum to zero");
  const Envelope env = coincident_envelope(c);

  ScanTable table;
  table.columns = {"A", "P1", "P2", "P3", "Pi"};
  if (s.numeric_check) {
    for (const char* n : {"P1_num", "P2_num", "P3_num", "Pi_num"}) table.columns.emplace_back(n);
  }
  table.metadata = {{"scan", "area"},
                    {"weights", std::to_string(w[0]) + "," + std::to_string(w[1]) + "," +
                                    std::to_string(w[2])},
                    {"q", std::to_string(q.q12)}};

  table.rows = parallel_map(s.steps, workers, [&](std::size_t k) {
    const double area = linspace_at(s.area_min, s.area_max, s.steps, k);
    const Populations p = coincident_for_initial(w, q.q12, area, c.initial_state);
    std::vector<double> row = {area, p.p1, p.p2, p.p3, p.pi};
    if (s.numeric_check) {
      const Populations n = final_populations(q, coincident_pulses(w, env, area), AutoTrap{},
                                              c.initial_state, c.grid);
      row.insert(row.end(), {n.p1, n.p2, n.p3, n.pi});
    }
    return row;
  });
  return table;
}

/// Pump and Stokes Gaussians of nominal width T, delayed by 2*delay_ratio*T.
inline PulseTriple width_scan_pulses(const SystemConfig& c, double delay_ratio, double T) {
  PulseTriple p = c.pulses;
  const double width = c.width_factor * T;
  p.pump = Gaussian{peak_rate(c.pulses.pump), delay_ratio * T, width};
  p.stokes = Gaussian{peak_rate(c.pulses.stokes), -delay_ratio * T, width};
  return p;
}

inline ScanTable run_width_scan(const SystemConfig& c, const WidthScan& s,
                                std::size_t workers = 1) {
  validate(c);
  ScanTable table;
  table.columns = {"T", "gamma3_T", "P1", "P2", "P3", "Pi"};
  table.metadata = {{"scan", "width"},
                    {"policy", "auto-trap"},
                    {"delay_ratio", std::to_string(s.delay_ratio)},
                    {"width_factor", std::to_string(c.width_factor)}};
  const double gamma3 = peak_rate(c.pulses.control);
  GridSettings grid = c.grid;
  grid.t0.reset();
  grid.t1.reset();

  table.rows = parallel_map(s.steps, workers, [&](std::size_t k) {
    const double T = linspace_at(s.width_min, s.width_max, s.steps, k);
    const Populations p = final_populations(c.fano, width_scan_pulses(c, s.delay_ratio, T),
                                            AutoTrap{}, c.initial_state, grid);
    return std::vector<double>{T, gamma3 * T, p.p1, p.p2, p.p3, p.pi};
  });
  return table;
}

inline ScanTable run_detuning_scan(const SystemConfig& c, const DetuningGrid& s,
                                   std::size_t workers = 1) {
  validate(c);
  ScanTable table;
  table.columns = {"gamma3", "delta_sum", "delta_diff", "P1", "P2", "P3", "Pi"};
  table.metadata = {
      {"scan", "detuning"},
      {"policy", "static, Stark shifts zero"},
      {"delta_sum_range", std::to_string(s.sum_min) + "," + std::to_string(s.sum_max)},
      {"delta_diff_range", std::to_string(s.diff_min) + "," + std::to_string(s.diff_max)},
      {"steps", std::to_string(s.sum_steps) + "x" + std::to_string(s.diff_steps)},
      {"width_factor", std::to_string(c.width_factor)}};

  const std::size_t plane = s.sum_steps * s.diff_steps;
  const std::size_t n = plane * s.gamma3.size();
  table.rows = parallel_map(n, workers, [&](std::size_t idx) {
    const double gamma3 = s.gamma3[idx / plane];
    const std::size_t in_plane = idx % plane;
    const double sum = linspace_at(s.sum_min, s.sum_max, s.sum_steps, in_plane / s.diff_steps);
    const double diff =
        linspace_at(s.diff_min, s.diff_max, s.diff_steps, in_plane % s.diff_steps);
    PulseTriple pulses = c.pulses;
    pulses.control = Constant{gamma3};
    const StaticDetuning policy{0.5 * (sum + diff), 0.5 * (sum - diff)};
    const Populations p = final_populations(c.fano, pulses, policy, c.initial_state, c.grid);
    return std::vector<double>{gamma3, sum, diff, p.p1, p.p2, p.p3, p.pi};
  });
  return table;
}

// ---------------------------------------------------------------------------
// CSV: 17 significant digits, '.' separator, '\n' line endings.

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os, const ScanTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

inline ScanTable trajectory_table(const Trajectory& traj) {
  ScanTable table;
  table.columns = {"t", "P1", "P2", "P3", "Pi", "norm"};
  table.rows.reserve(traj.records.size());
  for (const auto& r : traj.records) table.rows.push_back({r.t, r.p1, r.p2, r.p3, r.pi, r.norm});
  return table;
}

}  // namespace tripod
