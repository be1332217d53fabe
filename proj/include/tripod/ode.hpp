#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta integrator for small complex
// linear systems dy/dt = f(t, y). Steps are clamped so every requested
// sample time is hit exactly.

#include <tripod/errors.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>

namespace tripod {

struct OdeOptions {
  /// Maximum local error per step (infinity norm), in units of the state norm.
  double tol = 1e-10;
  /// First trial step; 0 picks one from the initial derivative.
  double initial_step = 0.0;
  std::size_t max_steps = 100'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                        b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

}  // namespace dopri

/// Integrates from t0 to t1. `rhs(t, y, dydt)` fills dydt; `observe(t, y)` is
/// called at each time in `samples` (sorted, inside [t0, t1]). Throws
/// NumericError on step-size underflow, carrying the offending time.
template <int N, class Rhs, class Observer>
OdeStats integrate_dopri5(const Rhs& rhs, Eigen::Matrix<std::complex<double>, N, 1>& y,
                          double t0, double t1, std::span<const double> samples,
                          Observer&& observe, const OdeOptions& options = {}) {
  using State = Eigen::Matrix<std::complex<double>, N, 1>;
  using namespace dopri;

  OdeStats stats;
  std::size_t next_sample = 0;
  while (next_sample < samples.size() && samples[next_sample] <= t0) {
    observe(samples[next_sample], y);
    ++next_sample;
  }
  if (!(t1 > t0)) return stats;

  State k1, k2, k3, k4, k5, k6, k7, tmp, y_new, err_vec;
  rhs(t0, y, k1);
  ++stats.evaluations;

  double h = options.initial_step;
  if (h <= 0.0) {
    const double dnorm = k1.cwiseAbs().maxCoeff();
    const double ynorm = std::max(y.cwiseAbs().maxCoeff(), 1.0);
    h = dnorm > 1e-12 ? 0.01 * ynorm / dnorm : 1e-3 * (t1 - t0);
    h = std::min(h, t1 - t0);
  }

  double t = t0;
  while (t < t1) {
    if (stats.accepted + stats.rejected >= options.max_steps) {
      throw NumericError("integrate_dopri5: step budget exhausted", t);
    }
    const double target = next_sample < samples.size() ? std::min(samples[next_sample], t1) : t1;
    bool hits_target = false;
    double step = h;
    if (t + step >= target) {
      step = target - t;
      hits_target = true;
    }
    if (step < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      if (hits_target) {
        // Target coincides with t up to rounding.
        t = target;
        while (next_sample < samples.size() && samples[next_sample] <= t) {
          observe(samples[next_sample], y);
          ++next_sample;
        }
        continue;
      }
      std::ostringstream msg;
      msg << "step-size underflow at t = " << t;
      throw NumericError(msg.str(), t);
    }

    tmp = y + step * a21 * k1;
    rhs(t + c2 * step, tmp, k2);
    tmp = y + step * (a31 * k1 + a32 * k2);
    rhs(t + c3 * step, tmp, k3);
    tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * step, tmp, k4);
    tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * step, tmp, k5);
    tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + step, tmp, k6);
    y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double t_new = hits_target ? target : t + step;
    rhs(t_new, y_new, k7);
    stats.evaluations += 6;

    err_vec = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = err_vec.cwiseAbs().maxCoeff() / options.tol;

    if (err <= 1.0) {
      ++stats.accepted;
      t = t_new;
      y = y_new;
      k1 = k7;  // first-same-as-last
      while (next_sample < samples.size() && samples[next_sample] <= t) {
        observe(samples[next_sample], y);
        ++next_sample;
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // A step shortened to land on a sample says nothing about the natural step.
      h = hits_target ? std::max(h, step * factor) : step * factor;
    } else {
      ++stats.rejected;
      h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    }
  }
  return stats;
}

}  // namespace tripod
