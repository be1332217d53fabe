#pragma once

// Tripod-continuum Hamiltonian and the algebra built on it: trapping
// detunings, eigenvalues, mixing angles, adiabatic states and the rotated
// (Phi1', Phi2', Phi3) basis.
//
// Conventions: hbar = 1, the Stark-shifted energy of psi3 is the zero of
// energy, and the Hamiltonian is H = A + iB with
//
//   A = -1/2 [ -2 D1           q12 sqrt(G1 G2)  q13 sqrt(G1 G3) ]
//            [ q12 sqrt(G1 G2)  -2 D2           q23 sqrt(G2 G3) ]
//            [ q13 sqrt(G1 G3)  q23 sqrt(G2 G3)  0              ]
//   B = -1/2 v v^T,   v = (sqrt G1, sqrt G2, sqrt G3).

#include <tripod/errors.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>

namespace tripod {

using Complex = std::complex<double>;
using ComplexMatrix3 = Eigen::Matrix3cd;
using RealMatrix3 = Eigen::Matrix3d;
using RealVector3 = Eigen::Vector3d;

/// Denominators below this value (rate units squared) are treated as zero.
inline constexpr double kRateEpsilon = 1e-30;
/// Tolerance for equality comparisons between Fano parameters.
inline constexpr double kFanoEpsilon = 1e-12;

struct FanoParams {
  double q12 = 0.0;
  double q13 = 0.0;
  double q23 = 0.0;

  bool all_finite() const {
    return std::isfinite(q12) && std::isfinite(q13) && std::isfinite(q23);
  }
};

/// Ionization rates of psi1, psi2, psi3 at one instant, with time derivatives.
struct RateSnapshot {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double dg1 = 0.0;
  double dg2 = 0.0;
  double dg3 = 0.0;

  double total() const { return g1 + g2 + g3; }
  double total_derivative() const { return dg1 + dg2 + dg3; }
  bool valid() const {
    return g1 >= 0.0 && g2 >= 0.0 && g3 >= 0.0 && std::isfinite(total());
  }
};

/// Two-photon detunings. D1() and D2() are the values entering the
/// Hamiltonian: D_k = delta_k + stark_k - stark3.
struct Detunings {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double stark1 = 0.0;
  double stark2 = 0.0;
  double stark3 = 0.0;

  double D1() const { return delta1 + stark1 - stark3; }
  double D2() const { return delta2 + stark2 - stark3; }

  static Detunings from_total(double d1, double d2) { return {d1, d2, 0.0, 0.0, 0.0}; }
};

/// Detunings that make A and B commute (the population trapping conditions).
inline Detunings trapping_detunings(const FanoParams& q, const RateSnapshot& r) {
  const double d1 = 0.5 * q.q13 * (r.g3 - r.g1) + 0.5 * (q.q12 - q.q23) * r.g2;
  const double d2 = 0.5 * q.q23 * (r.g3 - r.g2) + 0.5 * (q.q12 - q.q13) * r.g1;
  return Detunings::from_total(d1, d2);
}

inline ComplexMatrix3 assemble_hamiltonian(const FanoParams& q, const RateSnapshot& r,
                                           const Detunings& d) {
  const double s1 = std::sqrt(r.g1);
  const double s2 = std::sqrt(r.g2);
  const double s3 = std::sqrt(r.g3);

  RealMatrix3 a;
  a << d.D1(), -0.5 * q.q12 * s1 * s2, -0.5 * q.q13 * s1 * s3,
      -0.5 * q.q12 * s1 * s2, d.D2(), -0.5 * q.q23 * s2 * s3,
      -0.5 * q.q13 * s1 * s3, -0.5 * q.q23 * s2 * s3, 0.0;

  const RealVector3 v(s1, s2, s3);
  const RealMatrix3 b = -0.5 * v * v.transpose();

  ComplexMatrix3 h;
  h.real() = a;
  h.imag() = b;
  return h;
}

/// Frobenius norm of [A, B] where A = Re H and B = Im H.
inline double commutator_defect(const ComplexMatrix3& h) {
  const RealMatrix3 a = h.real();
  const RealMatrix3 b = h.imag();
  return (a * b - b * a).norm();
}

/// Eigenvalues of A, B and H under the trapping conditions. Index 2 is the
/// decaying eigenvalue; indices 0 and 1 are the trapped pair a +/- sqrt(a^2+b).
struct EigenSplit {
  std::array<double, 3> lamA{};
  std::array<double, 3> lamB{};
  std::array<Complex, 3> lamH{};
  double a = 0.0;
  double b = 0.0;
};

inline EigenSplit eigen_split(const FanoParams& q, const RateSnapshot& r) {
  const double g1 = r.g1, g2 = r.g2, g3 = r.g3;
  EigenSplit out;
  out.a = 0.25 * (q.q13 * (g3 - g1) + q.q23 * (g3 - g2) + q.q12 * (g1 + g2));
  out.b = 0.25 * g3 *
          (q.q13 * (q.q13 - q.q12) * g1 + q.q23 * (q.q23 - q.q12) * g2 - q.q13 * q.q23 * g3);

  double disc = out.a * out.a + out.b;
  if (disc < 0.0) {
    // A is real symmetric, so only rounding can push the discriminant below zero.
    const double scale = out.a * out.a + std::abs(out.b);
    if (disc < -1e-12 * scale) {
      throw NumericError("eigen_split: a^2 + b < 0 (complex branch) under trapping conditions");
    }
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  out.lamA = {out.a + root, out.a - root, -0.5 * (q.q13 * g1 + q.q23 * g2)};
  out.lamB = {0.0, 0.0, -0.5 * r.total()};
  for (std::size_t k = 0; k < 3; ++k) out.lamH[k] = Complex(out.lamA[k], out.lamB[k]);
  return out;
}

/// Mixing angles of the adiabatic states. The *_indeterminate flags mark
/// angles that were carried over from the previous instant (or zeroed)
/// because their defining ratio was 0/0.
struct MixingAngles {
  double theta = 0.0;
  double phi = 0.0;
  double chi = 0.0;
  bool theta_indeterminate = false;
  bool phi_indeterminate = false;
  bool chi_indeterminate = false;

  bool any_indeterminate() const {
    return theta_indeterminate || phi_indeterminate || chi_indeterminate;
  }
};

namespace detail {

inline double sign_or_one(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Numerator and denominator of cot(2 chi), scaled by (q13 - q23).
struct ChiFraction {
  double numerator;
  double denominator;
};

inline ChiFraction chi_fraction(const FanoParams& q, const RateSnapshot& r) {
  const double s = r.g1 + r.g2;
  const double dq = q.q13 - q.q23;
  const double root = std::sqrt(r.g1 * r.g2 * r.g3 * r.total());
  return {(r.g1 - r.g2) * (s + 2.0 * r.g3) * dq + s * s * (q.q13 + q.q23 - 2.0 * q.q12),
          4.0 * root * dq};
}

inline bool nearly_equal_q(double x, double y) {
  return std::abs(x - y) <= kFanoEpsilon * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace detail

/// Angles theta, phi, chi at one instant. Pass the previous instant's angles
/// to carry values across 0/0 points and to keep chi continuous.
inline MixingAngles mixing_angles(const FanoParams& q, const RateSnapshot& r,
                                  const std::optional<MixingAngles>& previous = std::nullopt) {
  MixingAngles m;
  const double s = r.g1 + r.g2;

  if (s < kRateEpsilon) {
    m.theta_indeterminate = true;
    m.theta = previous ? previous->theta : 0.0;
  } else {
    m.theta = std::atan2(std::sqrt(r.g1), std::sqrt(r.g2));
  }

  if (r.total() < kRateEpsilon) {
    m.phi_indeterminate = true;
    m.phi = previous ? previous->phi : 0.0;
  } else {
    m.phi = std::atan2(std::sqrt(r.g3), std::sqrt(s));
  }

  const bool equal13_23 = detail::nearly_equal_q(q.q13, q.q23);
  if (equal13_23 && detail::nearly_equal_q(q.q13, q.q12)) {
    // Phi1' and Phi2' are degenerate eigenstates: any chi works.
    m.chi_indeterminate = true;
    m.chi = previous ? previous->chi : 0.0;
    return m;
  }
  if (equal13_23) {
    m.chi = 0.0;
  } else {
    const auto [num, den] = detail::chi_fraction(q, r);
    if (std::abs(num) < kRateEpsilon && std::abs(den) < kRateEpsilon) {
      m.chi_indeterminate = true;
      m.chi = previous ? previous->chi : 0.0;
      return m;
    }
    // arccot(num/den) in [0, pi]; den == 0 resolves to the limit along sgn(q13 - q23).
    m.chi = 0.5 * std::atan2(std::abs(den), num * detail::sign_or_one(q.q13 - q.q23));
  }

  if (previous && !previous->chi_indeterminate) {
    // chi is defined mod pi/2; pick the branch nearest the previous value.
    const double quarter = 0.5 * std::numbers::pi;
    m.chi += quarter * std::round((previous->chi - m.chi) / quarter);
  }
  return m;
}

/// Common eigenstates Phi1, Phi2, Phi3 of A, B and H.
inline std::array<RealVector3, 3> adiabatic_states(const MixingAngles& m) {
  const double ct = std::cos(m.theta), st = std::sin(m.theta);
  const double cp = std::cos(m.phi), sp = std::sin(m.phi);
  const double cc = std::cos(m.chi), sc = std::sin(m.chi);
  return {RealVector3(ct * cc - st * sp * sc, -st * cc - ct * sp * sc, cp * sc),
          RealVector3(ct * sc + st * sp * cc, -st * sc + ct * sp * cc, -cp * cc),
          RealVector3(st * cp, ct * cp, sp)};
}

/// Columns are Phi1', Phi2', Phi3; C = R C'.
inline RealMatrix3 rotation_matrix(double theta, double phi) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  RealMatrix3 rot;
  rot << ct, st * sp, st * cp,
      -st, ct * sp, ct * cp,
      0.0, -cp, sp;
  return rot;
}

/// Hamiltonian in the (Phi1', Phi2', Phi3) basis under the trapping conditions.
struct RotatedHamiltonian {
  double haa = 0.0;
  double hbb = 0.0;
  double hcc = 0.0;
  double hab = 0.0;
  double theta_dot_sin_phi = 0.0;
  double theta_dot_cos_phi = 0.0;
  double phi_dot = 0.0;
  double decay = 0.0;  // -Gamma/2, imaginary part of the (3,3) entry

  ComplexMatrix3 matrix() const {
    const Complex i(0.0, 1.0);
    ComplexMatrix3 h;
    h << haa, hab - i * theta_dot_sin_phi, -i * theta_dot_cos_phi,
        hab + i * theta_dot_sin_phi, hbb, i * phi_dot,
        i * theta_dot_cos_phi, -i * phi_dot, Complex(hcc, decay);
    return h;
  }

  /// (hbb - haa) / (2 hab); equals cot(2 chi). Undefined when hab == 0.
  double cot_two_chi() const { return (hbb - haa) / (2.0 * hab); }
};

namespace detail {

// Rates below this are treated as exactly zero in logarithmic derivatives.
inline constexpr double kTinyRate = std::numeric_limits<double>::min();

}  // namespace detail

/// Time derivative of theta from analytic rate derivatives, written as
/// (1/2)(dg1/g1 - dg2/g2) sin(theta) cos(theta) so that it stays accurate in
/// pulse tails where the product g1*g2 underflows long before theta freezes.
inline double theta_rate(const RateSnapshot& r) {
  if (r.g1 < detail::kTinyRate || r.g2 < detail::kTinyRate) return 0.0;
  const double sin_cos = std::sqrt(r.g1) * std::sqrt(r.g2) / (r.g1 + r.g2);
  return 0.5 * (r.dg1 / r.g1 - r.dg2 / r.g2) * sin_cos;
}

/// Time derivative of phi, in the same logarithmic form as theta_rate.
inline double phi_rate(const RateSnapshot& r) {
  const double s = r.g1 + r.g2;
  if (r.g3 < detail::kTinyRate || s < detail::kTinyRate) return 0.0;
  const double sin_cos = std::sqrt(r.g3) * std::sqrt(s) / r.total();
  return 0.5 * (r.dg3 / r.g3 - (r.dg1 + r.dg2) / s) * sin_cos;
}

inline RotatedHamiltonian rotated_hamiltonian(const FanoParams& q, const RateSnapshot& r) {
  const double s = r.g1 + r.g2;
  if (s < kRateEpsilon) {
    throw ModelError("rotated_hamiltonian: Gamma1 + Gamma2 vanishes");
  }
  const double w13 = q.q13 * r.g1 + q.q23 * r.g2;
  const double w31 = q.q23 * r.g1 + q.q13 * r.g2;

  RotatedHamiltonian h;
  h.haa = (r.g3 * w31 + q.q12 * s * s - s * w13) / (2.0 * s);
  h.hbb = r.g3 * w13 / (2.0 * s);
  h.hcc = -0.5 * w13;
  h.hab = (q.q13 - q.q23) / (2.0 * s) * std::sqrt(r.g1 * r.g2 * r.g3 * r.total());

  const double phi = std::atan2(std::sqrt(r.g3), std::sqrt(s));
  const double theta_dot = theta_rate(r);
  h.theta_dot_sin_phi = theta_dot * std::sin(phi);
  h.theta_dot_cos_phi = theta_dot * std::cos(phi);
  h.phi_dot = phi_rate(r);
  h.decay = -0.5 * r.total();
  return h;
}

}  // namespace tripod
