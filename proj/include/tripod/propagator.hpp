#pragma once

// Integration of i dC/dt = H(t) C in the bare basis.

#include <tripod/core_model.hpp>
#include <tripod/errors.hpp>
#include <tripod/ode.hpp>
#include <tripod/pulses.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <variant>
#include <vector>

namespace tripod {

struct AmplitudeVector {
  Complex c1{1.0, 0.0};
  Complex c2{0.0, 0.0};
  Complex c3{0.0, 0.0};

  /// Unit amplitude in bare state psi_k, k in {1, 2, 3}.
  static AmplitudeVector basis(int k) {
    if (k < 1 || k > 3) throw ModelError("AmplitudeVector::basis: index must be 1, 2 or 3");
    AmplitudeVector a{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    (k == 1 ? a.c1 : k == 2 ? a.c2 : a.c3) = 1.0;
    return a;
  }
  static AmplitudeVector from_vector(const Eigen::Vector3cd& v) { return {v(0), v(1), v(2)}; }

  Eigen::Vector3cd vector() const { return {c1, c2, c3}; }
  double norm_squared() const { return std::norm(c1) + std::norm(c2) + std::norm(c3); }
};

/// Bound-state populations and the ionization complement.
struct Populations {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double pi = 0.0;
};

inline Populations populations(const AmplitudeVector& c) {
  const double p1 = std::norm(c.c1), p2 = std::norm(c.c2), p3 = std::norm(c.c3);
  return {p1, p2, p3, 1.0 - p1 - p2 - p3};
}

/// Detunings follow the trapping conditions at every instant.
struct AutoTrap {};

/// Fixed two-photon detunings; Stark shifts neglected.
struct StaticDetuning {
  double delta1 = 0.0;
  double delta2 = 0.0;
};

using DetuningPolicy = std::variant<AutoTrap, StaticDetuning>;

inline Detunings detunings_at(const DetuningPolicy& policy, const FanoParams& q,
                              const RateSnapshot& r) {
  if (const auto* s = std::get_if<StaticDetuning>(&policy)) return {s->delta1, s->delta2};
  return trapping_detunings(q, r);
}

/// One sample of a trajectory. `norm` is |C|^2, so pi = 1 - norm.
struct TrajectoryRecord {
  double t = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double pi = 0.0;
  double norm = 0.0;
  AmplitudeVector amplitudes;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  OdeStats stats;

  const TrajectoryRecord& final() const { return records.back(); }
};

struct PropagationGrid {
  double t0 = 0.0;
  double t1 = 0.0;
  double tol = 1e-10;
  /// Number of uniformly spaced records used when sample_times is empty.
  std::size_t samples = 512;
  /// Explicit record times inside [t0, t1]; t1 is appended if missing.
  std::vector<double> sample_times;
};

inline std::vector<double> uniform_times(double t0, double t1, std::size_t n) {
  if (n < 2) return {t1};
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  out.back() = t1;
  return out;
}

/// Symmetric window [-span, span] with span from default_time_span.
inline PropagationGrid default_grid(const PulseTriple& p, double tol = 1e-10,
                                    std::size_t samples = 512) {
  const double span = default_time_span(p);
  return {-span, span, tol, samples, {}};
}

namespace detail {

inline std::vector<double> record_times(const PropagationGrid& grid) {
  std::vector<double> times =
      grid.sample_times.empty() ? uniform_times(grid.t0, grid.t1, grid.samples) : grid.sample_times;
  for (double t : times) {
    if (t < grid.t0 || t > grid.t1) throw ModelError("propagate: sample time outside [t0, t1]");
  }
  if (times.empty() || times.back() != grid.t1) times.push_back(grid.t1);
  return times;
}

}  // namespace detail

/// Integrates the tripod amplitudes from grid.t0 to grid.t1 with local error
/// at most grid.tol per step, recording populations at the sample times.
/// Throws NumericError (with the offending time) if the step size underflows.
inline Trajectory propagate(const FanoParams& q, const PulseTriple& pulses,
                            const DetuningPolicy& policy, const AmplitudeVector& init,
                            const PropagationGrid& grid) {
  if (!(grid.t0 < grid.t1)) throw ModelError("propagate: requires t0 < t1");
  if (std::abs(init.norm_squared() - 1.0) > 1e-9) {
    throw ModelError("propagate: initial amplitudes must be normalized");
  }

  const std::vector<double> times = detail::record_times(grid);
  Trajectory traj;
  traj.records.reserve(times.size());

  const Complex minus_i(0.0, -1.0);
  auto rhs = [&](double t, const Eigen::Vector3cd& c, Eigen::Vector3cd& dc) {
    const RateSnapshot r = evaluate(pulses, t);
    dc.noalias() = minus_i * (assemble_hamiltonian(q, r, detunings_at(policy, q, r)) * c);
  };
  auto observe = [&](double t, const Eigen::Vector3cd& c) {
    const AmplitudeVector a = AmplitudeVector::from_vector(c);
    const Populations p = populations(a);
    traj.records.push_back({t, p.p1, p.p2, p.p3, p.pi, a.norm_squared(), a});
  };

  Eigen::Vector3cd state = init.vector();
  OdeOptions opts;
  opts.tol = grid.tol;
  traj.stats = integrate_dopri5<3>(rhs, state, grid.t0, grid.t1, times, observe, opts);
  return traj;
}

}  // namespace tripod
