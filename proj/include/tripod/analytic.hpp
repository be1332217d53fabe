#pragma once

// Closed-form results for the tripod: coincident pulses, ionization extremes,
// adiabatic-limit transfer, the adiabaticity window, level-crossing
// diagnostics and the effective two-state reduction for a strong control.

#include <tripod/core_model.hpp>
#include <tripod/errors.hpp>
#include <tripod/ode.hpp>
#include <tripod/propagator.hpp>
#include <tripod/pulses.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tripod {

// ---------------------------------------------------------------------------
// Coincident pulses, Gamma_k(t) = gamma_k f(t), all Fano parameters equal.

struct CoincidentSpec {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double gamma3 = 1.0;
  double q = 0.0;
  double area = 0.0;  // A = integral of Gamma(t), dimensionless
};

/// Final populations for an atom starting in psi1. P2 carries the weight
/// gamma1*gamma2 and P3 the weight gamma1*gamma3.
inline Populations coincident_populations(const CoincidentSpec& s) {
  const double gamma = s.gamma1 + s.gamma2 + s.gamma3;
  if (s.gamma1 < 0.0 || s.gamma2 < 0.0 || s.gamma3 < 0.0 || !(gamma > 0.0) || s.area < 0.0) {
    throw ModelError("coincident_populations: need gamma_k >= 0, sum > 0 and A >= 0");
  }
  const double decay = std::exp(-s.area);
  const double half_decay = std::exp(-0.5 * s.area);
  const double beat = std::cos(0.5 * s.q * s.area);
  const double others = s.gamma2 + s.gamma3;
  const double fringe = 1.0 + decay - 2.0 * half_decay * beat;
  const double g2 = gamma * gamma;

  Populations p;
  p.p1 = (others * others + s.gamma1 * s.gamma1 * decay +
          2.0 * s.gamma1 * others * half_decay * beat) / g2;
  p.p2 = s.gamma1 * s.gamma2 / g2 * fringe;
  p.p3 = s.gamma1 * s.gamma3 / g2 * fringe;
  p.pi = s.gamma1 / gamma * -std::expm1(-s.area);
  return p;
}

/// Upper bound on ionization for coincident pulses: initial population of Phi3.
inline double max_ionization_coincident(double g1, double g2, double g3) {
  const double gamma = g1 + g2 + g3;
  if (!(gamma > 0.0)) throw ModelError("max_ionization_coincident: total rate must be positive");
  return g1 / gamma;
}

/// Ionization when only the decaying adiabatic state is populated (pump first).
inline double complete_ionization(double area) {
  if (area < 0.0) throw ModelError("complete_ionization: area must be non-negative");
  return -std::expm1(-area);
}

// ---------------------------------------------------------------------------
// Delayed pulses with the control arriving first and leaving last.

struct TransferEstimate {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  /// Integral of dtheta/dt * sin(phi) over the window.
  double mixing_integral = 0.0;
  /// False when the window ends do not show the control dominating and the
  /// Stokes pulse preceding the pump.
  bool ordering_satisfied = true;
};

/// Adiabatic-limit populations for q12 = q13 = q23 and the
/// control-first/control-last, Stokes-before-pump ordering. `ratio_tol` is
/// the largest rate ratio accepted as "vanishing" at the window ends.
inline TransferEstimate adiabatic_transfer_populations(const PulseTriple& p, double t0, double t1,
                                                       double ratio_tol = 1e-3) {
  if (!(t0 < t1)) throw ModelError("adiabatic_transfer_populations: requires t0 < t1");

  auto small = [ratio_tol](double num, double den) {
    return den > 0.0 && num <= ratio_tol * den;
  };
  const RateSnapshot a = evaluate(p, t0);
  const RateSnapshot b = evaluate(p, t1);

  TransferEstimate out;
  out.ordering_satisfied = small(a.g1, a.g3) && small(a.g2, a.g3) && small(b.g1, b.g3) &&
                           small(b.g2, b.g3) && small(a.g1, a.g2) && small(b.g2, b.g1);

  auto integrand = [&p](double t) {
    const RateSnapshot r = evaluate(p, t);
    const double s = r.g1 + r.g2;
    if (s < kRateEpsilon) return 0.0;
    const double sin_phi = std::sqrt(r.g3 / r.total());
    return theta_rate(r) * sin_phi;
  };
  out.mixing_integral = adaptive_simpson(integrand, t0, t1, 1e-11);

  // The atom follows Phi1' = psi1 -> -psi2 while the nonadiabatic coupling
  // rotates it into Phi2' = psi2 -> psi1 by the mixing integral.
  const double s = std::sin(out.mixing_integral);
  const double c = std::cos(out.mixing_integral);
  out.p1 = s * s;
  out.p2 = c * c;
  out.p3 = 0.0;
  return out;
}

enum class TransferRegime {
  TransferViaPhi1,  // q13 = q23 != q12: psi1 -> psi2
  ReturnViaPhi2,    // q13 != q23: population returns to psi1
  DelayControlled,  // q13 = q23 = q12: final superposition set by the delay
};

inline std::string_view to_string(TransferRegime r) {
  switch (r) {
    case TransferRegime::TransferViaPhi1:
      return "TransferViaPhi1";
    case TransferRegime::ReturnViaPhi2:
      return "ReturnViaPhi2";
    case TransferRegime::DelayControlled:
      return "DelayControlled";
  }
  return "unknown";
}

/// Adiabatic-limit outcome of the control-first ordering, from the pattern of
/// equal Fano parameters (absolute tolerance 1e-12).
inline TransferRegime transfer_asymptotics(const FanoParams& q) {
  const bool eq13_23 = std::abs(q.q13 - q.q23) <= kFanoEpsilon;
  if (!eq13_23) return TransferRegime::ReturnViaPhi2;
  if (std::abs(q.q12 - q.q13) <= kFanoEpsilon) return TransferRegime::DelayControlled;
  return TransferRegime::TransferViaPhi1;
}

/// Bounds on gamma3*T for appreciable psi1 -> psi2 transfer with a strong
/// constant control and equal pump/Stokes peaks delayed by 2 tau.
struct AdiabaticityWindow {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double value = 0.0;  // gamma3 * T

  /// "<<" read as a factor `margin` away from each bound.
  bool well_inside(double margin = 3.0) const {
    return value >= margin * lower && margin * value <= upper;
  }
};

inline AdiabaticityWindow adiabaticity_window(const FanoParams& q, double gamma3, double tau,
                                              double T) {
  if (!(T > 0.0)) throw ModelError("adiabaticity_window: T must be positive");
  const double sum = q.q13 + q.q23;
  const double diff = std::abs(q.q13 - q.q23);
  AdiabaticityWindow w;
  w.lower = 2.0 * tau / (T * std::sqrt(1.0 + 0.25 * sum * sum));
  w.upper = diff == 0.0 ? std::numeric_limits<double>::infinity() : 8.0 * tau / (T * diff);
  w.value = gamma3 * T;
  return w;
}

// ---------------------------------------------------------------------------
// Level-crossing diagnostics in the (Phi1', Phi2', Phi3) basis.

struct LandauZenerDiagnostics {
  bool crossing_found = false;
  bool hab_identically_zero = false;
  double t_cross = std::numeric_limits<double>::quiet_NaN();
  /// [hab(t0)]^2 and (1/2)|d(hbb - haa)/dt| at the crossing.
  double hab_squared = std::numeric_limits<double>::quiet_NaN();
  double half_slope = std::numeric_limits<double>::quiet_NaN();
  /// Extremes over the window of |dtheta/dt cos phi| and of
  /// sqrt((haa - hcc)^2 + Gamma^2 / 4), plus the largest pointwise ratio.
  double max_nonadiabatic = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  std::string note;
};

/// Scans haa - hbb on `scan_points` uniform times in [t0, t1], refines the
/// first sign change by bisection, and evaluates both adiabaticity conditions.
inline LandauZenerDiagnostics landau_zener_conditions(const FanoParams& q, const PulseTriple& p,
                                                      double t0, double t1,
                                                      int scan_points = 4001) {
  if (!(t0 < t1) || scan_points < 2) throw ModelError("landau_zener_conditions: bad window");

  LandauZenerDiagnostics out;
  out.hab_identically_zero = std::abs(q.q13 - q.q23) <= kFanoEpsilon;
  // With all Fano parameters equal, haa - hbb vanishes identically and its
  // sign only reflects rounding.
  const bool degenerate =
      out.hab_identically_zero && std::abs(q.q12 - q.q13) <= kFanoEpsilon;

  auto split = [&](double t) -> std::optional<RotatedHamiltonian> {
    const RateSnapshot r = evaluate(p, t);
    if (r.g1 + r.g2 < kRateEpsilon) return std::nullopt;
    return rotated_hamiltonian(q, r);
  };

  bool have_prev = false;
  double prev_t = t0, prev_f = 0.0;
  const double dt = (t1 - t0) / (scan_points - 1);
  for (int k = 0; k < scan_points; ++k) {
    const double t = (k + 1 == scan_points) ? t1 : t0 + k * dt;
    const auto h = split(t);
    if (!h) {
      have_prev = false;
      continue;
    }
    const double gamma = -2.0 * h->decay;
    const double gap = std::hypot(h->haa - h->hcc, 0.5 * gamma);
    const double lhs = std::abs(h->theta_dot_cos_phi);
    out.max_nonadiabatic = std::max(out.max_nonadiabatic, lhs);
    out.min_gap = std::min(out.min_gap, gap);
    if (gap > 0.0) out.max_ratio = std::max(out.max_ratio, lhs / gap);

    // Differences at rounding level carry no sign information.
    const double f = h->haa - h->hbb;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(h->haa) + std::abs(h->hbb));
    if (std::abs(f) <= noise) continue;
    if (!degenerate && !out.crossing_found && have_prev && (prev_f < 0.0) != (f < 0.0)) {
      double lo = prev_t, hi = t, flo = prev_f;
      for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = split(mid)->haa - split(mid)->hbb;
        if ((fm < 0.0) == (flo < 0.0) && fm != 0.0) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.crossing_found = true;
      out.t_cross = 0.5 * (lo + hi);
    }
    have_prev = true;
    prev_t = t;
    prev_f = f;
  }

  if (out.crossing_found) {
    const auto hc = split(out.t_cross);
    out.hab_squared = hc->hab * hc->hab;
    const double h = 1e-6 * (t1 - t0);
    const auto hp = split(out.t_cross + h);
    const auto hm = split(out.t_cross - h);
    if (hp && hm) {
      out.half_slope = 0.5 * std::abs(((hp->hbb - hp->haa) - (hm->hbb - hm->haa)) / (2.0 * h));
    }
  } else if (degenerate) {
    out.note = "no crossing: haa - hbb vanishes identically (all Fano parameters equal)";
  } else {
    out.note = "no crossing: haa - hbb does not change sign in the window";
  }
  if (out.hab_identically_zero) {
    out.note += out.note.empty() ? "" : "; ";
    out.note += "hab identically zero (q13 = q23): crossing condition trivially satisfied";
    if (out.crossing_found) out.hab_squared = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adiabatic elimination of a strongly ionized psi3.

struct EffectiveTwoState {
  double g1ae = 0.0;  // Gamma1 q13^2
  double g2ae = 0.0;  // Gamma2 q23^2
  double qae = 0.0;   // (q12 - q13 - q23) / (q13 q23)
  double dae = 0.0;   // D2 - D1 + Gamma2 q23 - Gamma1 q13
};

inline EffectiveTwoState effective_two_state(const FanoParams& q, const RateSnapshot& r,
                                             const Detunings& d) {
  const double denom = q.q13 * q.q23;
  if (denom == 0.0) throw ModelError("effective_two_state: q13 * q23 must be nonzero");
  return {r.g1 * q.q13 * q.q13, r.g2 * q.q23 * q.q23, (q.q12 - q.q13 - q.q23) / denom,
          d.D2() - d.D1() + r.g2 * q.q23 - r.g1 * q.q13};
}

using EffectiveSeries = std::function<EffectiveTwoState(double)>;

/// Effective parameters along the pulses, with detunings from `policy`.
inline EffectiveSeries effective_series(const FanoParams& q, const PulseTriple& p,
                                        const DetuningPolicy& policy) {
  return [q, p, policy](double t) {
    const RateSnapshot r = evaluate(p, t);
    return effective_two_state(q, r, detunings_at(policy, q, r));
  };
}

inline Eigen::Matrix2cd effective_hamiltonian(const EffectiveTwoState& e) {
  const Complex i(0.0, 1.0);
  const Complex off = -std::sqrt(e.g1ae * e.g2ae) * (e.qae + i);
  Eigen::Matrix2cd h;
  h << -i * e.g1ae, off, off, 2.0 * e.dae - i * e.g2ae;
  return 0.5 * h;
}

struct TwoStateRecord {
  double t = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double pi = 0.0;
  double norm = 0.0;
};

struct TwoStateTrajectory {
  std::vector<TwoStateRecord> records;
  OdeStats stats;

  const TwoStateRecord& final() const { return records.back(); }
};

inline TwoStateTrajectory propagate_effective(const EffectiveSeries& series,
                                              const Eigen::Vector2cd& init,
                                              const PropagationGrid& grid) {
  if (!(grid.t0 < grid.t1)) throw ModelError("propagate_effective: requires t0 < t1");
  if (std::abs(init.squaredNorm() - 1.0) > 1e-9) {
    throw ModelError("propagate_effective: initial amplitudes must be normalized");
  }
  const std::vector<double> times = detail::record_times(grid);

  TwoStateTrajectory traj;
  traj.records.reserve(times.size());
  const Complex minus_i(0.0, -1.0);
  auto rhs = [&](double t, const Eigen::Vector2cd& c, Eigen::Vector2cd& dc) {
    dc.noalias() = minus_i * (effective_hamiltonian(series(t)) * c);
  };
  auto observe = [&](double t, const Eigen::Vector2cd& c) {
    const double p1 = std::norm(c(0)), p2 = std::norm(c(1));
    traj.records.push_back({t, p1, p2, 1.0 - p1 - p2, p1 + p2});
  };
  Eigen::Vector2cd state = init;
  OdeOptions opts;
  opts.tol = grid.tol;
  traj.stats = integrate_dopri5<2>(rhs, state, grid.t0, grid.t1, times, observe, opts);
  return traj;
}

}  // namespace tripod
