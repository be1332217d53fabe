#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls the closed forms under test.

#include <tripod/core_model.hpp>
#include <tripod/propagator.hpp>
#include <tripod/pulses.hpp>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using tripod::Complex;

/// Eigenvalues of a dense complex matrix from Eigen's QR-based solver.
inline std::vector<Complex> dense_eigenvalues(const Eigen::Matrix3cd& h) {
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver(h, false);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

/// Largest distance between matched elements, trying every pairing.
inline double set_distance(std::vector<Complex> a, std::vector<Complex> b) {
  std::array<int, 3> perm = {0, 1, 2};
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(a[k] - b[perm[k]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Real symmetric eigenvalues, ascending.
inline std::array<double, 3> symmetric_eigenvalues(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

/// The Hamiltonian written out element by element.
inline Eigen::Matrix3cd hamiltonian_by_hand(const tripod::FanoParams& q, double g1, double g2,
                                            double g3, double D1, double D2) {
  const Complex i(0.0, 1.0);
  const double r12 = std::sqrt(g1 * g2), r13 = std::sqrt(g1 * g3), r23 = std::sqrt(g2 * g3);
  Eigen::Matrix3cd h;
  h(0, 0) = D1 - 0.5 * i * g1;
  h(1, 1) = D2 - 0.5 * i * g2;
  h(2, 2) = -0.5 * i * g3;
  h(0, 1) = h(1, 0) = -0.5 * r12 * (q.q12 + i);
  h(0, 2) = h(2, 0) = -0.5 * r13 * (q.q13 + i);
  h(1, 2) = h(2, 1) = -0.5 * r23 * (q.q23 + i);
  return h;
}

/// Central difference of a scalar function.
template <class F>
double central_difference(const F& f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

/// Fourth-order Richardson-extrapolated midpoint exponential propagator:
/// C(t + dt) = exp(-i H(t + dt/2) dt) C(t), run with n and 2n steps.
inline Eigen::Vector3cd exponential_propagate(const tripod::FanoParams& q,
                                              const tripod::PulseTriple& p,
                                              const tripod::DetuningPolicy& policy,
                                              const Eigen::Vector3cd& init, double t0, double t1,
                                              int n) {
  auto run = [&](int steps) {
    Eigen::Vector3cd c = init;
    const double dt = (t1 - t0) / steps;
    const Complex minus_i(0.0, -1.0);
    for (int k = 0; k < steps; ++k) {
      const double tm = t0 + (k + 0.5) * dt;
      const tripod::RateSnapshot r = tripod::evaluate(p, tm);
      const Eigen::Matrix3cd h =
          tripod::assemble_hamiltonian(q, r, tripod::detunings_at(policy, q, r));
      const Eigen::Matrix3cd step = (minus_i * dt * h).exp();
      c = step * c;
    }
    return c;
  };
  const Eigen::Vector3cd coarse = run(n);
  const Eigen::Vector3cd fine = run(2 * n);
  return fine + (fine - coarse) / 3.0;
}

/// Fixed-seed generator shared by the property suites.
inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline tripod::FanoParams random_fano(double lo = -10.0, double hi = 10.0) {
  return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
}

inline tripod::RateSnapshot random_rates(double lo = 0.01, double hi = 10.0) {
  return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi),
          uniform(-5.0, 5.0), uniform(-5.0, 5.0), uniform(-5.0, 5.0)};
}

}  // namespace oracle
