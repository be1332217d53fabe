#pragma once

// Ionization-rate envelopes for the pump, Stokes and control lasers.

#include <tripod/core_model.hpp>
#include <tripod/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>
#include <variant>

namespace tripod {

/// gamma * exp(-(t - center)^2 / width^2)
struct Gaussian {
  double gamma = 0.0;
  double center = 0.0;
  double width = 1.0;
};

/// Time-independent rate.
struct Constant {
  double gamma = 0.0;
};

/// Unit-peak Gaussian f(t) shared by several pulses (coincident pulses).
struct Envelope {
  double center = 0.0;
  double width = 1.0;

  double value(double t) const {
    const double x = (t - center) / width;
    return std::exp(-x * x);
  }
  double derivative(double t) const { return -2.0 * (t - center) / (width * width) * value(t); }
  double area() const { return width * std::sqrt(std::numbers::pi); }
};

/// gamma * f(t)
struct SharedEnvelope {
  double gamma = 0.0;
  Envelope envelope;
};

using PulseShape = std::variant<Gaussian, Constant, SharedEnvelope>;

struct PulseTriple {
  PulseShape pump = Constant{};
  PulseShape stokes = Constant{};
  PulseShape control = Constant{};
};

/// Value and time derivative of a single shape.
struct RateValue {
  double rate = 0.0;
  double derivative = 0.0;
};

inline RateValue evaluate_shape(const PulseShape& shape, double t) {
  return std::visit(
      [t](const auto& p) -> RateValue {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          const double x = (t - p.center) / p.width;
          const double rate = p.gamma * std::exp(-x * x);
          return {rate, -2.0 * x / p.width * rate};
        } else if constexpr (std::is_same_v<T, Constant>) {
          return {p.gamma, 0.0};
        } else {
          return {p.gamma * p.envelope.value(t), p.gamma * p.envelope.derivative(t)};
        }
      },
      shape);
}

inline RateSnapshot evaluate(const PulseTriple& p, double t) {
  const auto r1 = evaluate_shape(p.pump, t);
  const auto r2 = evaluate_shape(p.stokes, t);
  const auto r3 = evaluate_shape(p.control, t);
  return {r1.rate, r2.rate, r3.rate, r1.derivative, r2.derivative, r3.derivative};
}

inline double peak_rate(const PulseShape& shape) {
  return std::visit([](const auto& p) { return p.gamma; }, shape);
}

/// Largest Gaussian width in the triple, or 0 if no Gaussian is present.
inline double max_width(const PulseTriple& p) {
  double w = 0.0;
  for (const PulseShape* s : {&p.pump, &p.stokes, &p.control}) {
    if (const auto* g = std::get_if<Gaussian>(s)) w = std::max(w, g->width);
    if (const auto* e = std::get_if<SharedEnvelope>(s)) w = std::max(w, e->envelope.width);
  }
  return w;
}

/// Half-width of the propagation window standing in for (-inf, inf):
/// max over time-dependent shapes of |center| + 6 width (tails below e^-36).
/// Throws if every shape is constant.
inline double default_time_span(const PulseTriple& p) {
  double span = 0.0;
  bool found = false;
  for (const PulseShape* s : {&p.pump, &p.stokes, &p.control}) {
    if (const auto* g = std::get_if<Gaussian>(s)) {
      span = std::max(span, std::abs(g->center) + 6.0 * g->width);
      found = true;
    } else if (const auto* e = std::get_if<SharedEnvelope>(s)) {
      span = std::max(span, std::abs(e->envelope.center) + 6.0 * e->envelope.width);
      found = true;
    }
  }
  if (!found) throw ModelError("default_time_span: no time-dependent pulse to set the window");
  return span;
}

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with absolute tolerance tol.
/// The interval is pre-split into `panels` pieces so narrow peaks are not missed.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int panels = 64,
                        int max_depth = 40) {
  if (b <= a) return 0.0;
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double x0 = a + k * h;
    const double x1 = (k + 1 == panels) ? b : x0 + h;
    const double f0 = f(x0), f1 = f(x1), fm = f(0.5 * (x0 + x1));
    const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    sum += detail::simpson_recurse(f, x0, x1, f0, fm, f1, whole, tol / panels, max_depth);
  }
  return sum;
}

namespace detail {

inline double gaussian_area(double gamma, double center, double width, double t0, double t1) {
  const double root_pi = std::sqrt(std::numbers::pi);
  return 0.5 * gamma * width * root_pi *
         (std::erf((t1 - center) / width) - std::erf((t0 - center) / width));
}

}  // namespace detail

/// Integral of the total rate Gamma(t) over [t0, t1]. Finite intervals use
/// adaptive Simpson; an infinite bound switches to the closed-form Gaussian
/// integral, and then any nonzero constant rate is an error.
inline double pulse_area(const PulseTriple& p, double t0, double t1) {
  if (!(t0 < t1)) throw ModelError("pulse_area: requires t0 < t1");

  if (std::isinf(t0) || std::isinf(t1)) {
    double area = 0.0;
    for (const PulseShape* s : {&p.pump, &p.stokes, &p.control}) {
      if (const auto* g = std::get_if<Gaussian>(s)) {
        area += detail::gaussian_area(g->gamma, g->center, g->width, t0, t1);
      } else if (const auto* e = std::get_if<SharedEnvelope>(s)) {
        area += detail::gaussian_area(e->gamma, e->envelope.center, e->envelope.width, t0, t1);
      } else if (std::get<Constant>(*s).gamma != 0.0) {
        throw ModelError("pulse_area: constant rate over an infinite interval");
      }
    }
    return area;
  }

  const double gamma_max =
      std::max({peak_rate(p.pump), peak_rate(p.stokes), peak_rate(p.control)});
  if (gamma_max == 0.0) return 0.0;
  double time_scale = max_width(p);
  if (time_scale == 0.0) time_scale = t1 - t0;
  const double tol = 1e-10 * gamma_max * time_scale;
  return adaptive_simpson([&p](double t) { return evaluate(p, t).total(); }, t0, t1, tol);
}

}  // namespace tripod
