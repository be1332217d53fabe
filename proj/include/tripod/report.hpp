#pragma once

// JSON summary of a configuration: instantaneous model quantities at the
// pulse peak, window-wide extremes and the applicable closed-form results.

#include <tripod/analytic.hpp>
#include <tripod/core_model.hpp>
#include <tripod/propagator.hpp>
#include <tripod/pulses.hpp>
#include <tripod/scan.hpp>

#include <json.hpp>

#include <cmath>
#include <string>
#include <variant>

namespace tripod {

inline constexpr int kReportSchemaVersion = 1;

namespace detail {

// NaN and infinity have no JSON literal; they are written as null.
inline nlohmann::json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline nlohmann::json shape_json(const PulseShape& s) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return {{"shape", "gaussian"}, {"gamma", p.gamma}, {"center", p.center},
                  {"width", p.width}};
        } else if constexpr (std::is_same_v<T, Constant>) {
          return {{"shape", "constant"}, {"gamma", p.gamma}};
        } else {
          return {{"shape", "shared"}, {"gamma", p.gamma}, {"center", p.envelope.center},
                  {"width", p.envelope.width}};
        }
      },
      s);
}

inline bool all_equal(const FanoParams& q) {
  return std::abs(q.q12 - q.q13) <= kFanoEpsilon && std::abs(q.q13 - q.q23) <= kFanoEpsilon;
}

}  // namespace detail

inline nlohmann::json build_report(const SystemConfig& c, std::size_t scan_points = 4001) {
  validate(c);
  const PropagationGrid grid = make_grid(c.grid, c.pulses);
  const FanoParams& q = c.fano;

  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["units"] = {{"rate", "gamma0"}, {"time", "1/gamma0"}};
  j["fano"] = {{"q12", q.q12}, {"q13", q.q13}, {"q23", q.q23}};
  j["pulses"] = {{"pump", detail::shape_json(c.pulses.pump)},
                 {"stokes", detail::shape_json(c.pulses.stokes)},
                 {"control", detail::shape_json(c.pulses.control)},
                 {"width_factor", c.width_factor}};
  if (const auto* s = std::get_if<StaticDetuning>(&c.policy)) {
    j["detuning_policy"] = {{"policy", "static"}, {"delta1", s->delta1}, {"delta2", s->delta2}};
  } else {
    j["detuning_policy"] = {{"policy", "auto-trap"}};
  }
  j["window"] = {{"t0", grid.t0}, {"t1", grid.t1}};

  // Dense scan: peak of the total rate and window-wide extremes.
  double t_peak = grid.t0, gamma_peak = -1.0, max_defect = 0.0;
  const double dt = (grid.t1 - grid.t0) / static_cast<double>(scan_points - 1);
  for (std::size_t k = 0; k < scan_points; ++k) {
    const double t = k + 1 == scan_points ? grid.t1 : grid.t0 + dt * static_cast<double>(k);
    const RateSnapshot r = evaluate(c.pulses, t);
    if (r.total() > gamma_peak) {
      gamma_peak = r.total();
      t_peak = t;
    }
    const ComplexMatrix3 h = assemble_hamiltonian(q, r, detunings_at(c.policy, q, r));
    max_defect = std::max(max_defect, commutator_defect(h));
  }
  j["extrema"] = {{"t_peak", t_peak},
                  {"gamma_total_peak", gamma_peak},
                  {"max_commutator_defect", max_defect}};

  const RateSnapshot r = evaluate(c.pulses, t_peak);
  const Detunings trap = trapping_detunings(q, r);
  const Detunings used = detunings_at(c.policy, q, r);
  nlohmann::json peak;
  peak["t"] = t_peak;
  peak["rates"] = {{"gamma1", r.g1}, {"gamma2", r.g2}, {"gamma3", r.g3}};
  peak["trapping_detunings"] = {{"delta1", trap.delta1}, {"delta2", trap.delta2}};
  peak["applied_detunings"] = {{"D1", used.D1()}, {"D2", used.D2()}};
  peak["commutator_defect"] =
      commutator_defect(assemble_hamiltonian(q, r, used));
  try {
    const EigenSplit e = eigen_split(q, r);
    peak["eigen_split"] = {{"a", e.a},
                           {"b", e.b},
                           {"lambda_A", e.lamA},
                           {"lambda_B", e.lamB},
                           {"lambda_H_real", {e.lamH[0].real(), e.lamH[1].real(), e.lamH[2].real()}},
                           {"lambda_H_imag", {e.lamH[0].imag(), e.lamH[1].imag(), e.lamH[2].imag()}}};
  } catch (const NumericError& err) {
    peak["eigen_split"] = {{"error", err.what()}};
  }
  const MixingAngles m = mixing_angles(q, r);
  peak["mixing_angles"] = {{"theta", m.theta},
                           {"phi", m.phi},
                           {"chi", m.chi},
                           {"chi_indeterminate", m.chi_indeterminate}};
  j["peak"] = peak;

  j["pulse_area"] = pulse_area(c.pulses, grid.t0, grid.t1);
  j["transfer_regime"] = std::string(to_string(transfer_asymptotics(q)));

  if (detail::all_equal(q)) {
    const TransferEstimate est = adiabatic_transfer_populations(c.pulses, grid.t0, grid.t1);
    j["adiabatic_transfer"] = {{"P1", est.p1},
                               {"P2", est.p2},
                               {"P3", est.p3},
                               {"mixing_integral", est.mixing_integral},
                               {"ordering_satisfied", est.ordering_satisfied}};
  } else {
    j["adiabatic_transfer"] = nullptr;
  }

  // Window estimate for delayed Gaussian pump/Stokes of equal width.
  const auto* pump = std::get_if<Gaussian>(&c.pulses.pump);
  const auto* stokes = std::get_if<Gaussian>(&c.pulses.stokes);
  if (pump && stokes && std::abs(pump->width - stokes->width) <= 1e-12 * pump->width) {
    const double tau = 0.5 * std::abs(pump->center - stokes->center);
    const double T = pump->width / c.width_factor;
    const AdiabaticityWindow w = adiabaticity_window(q, peak_rate(c.pulses.control), tau, T);
    j["adiabaticity_window"] = {{"tau", tau},
                                {"T", T},
                                {"lower", detail::number(w.lower)},
                                {"upper", detail::number(w.upper)},
                                {"gamma3_T", w.value},
                                {"well_inside", w.well_inside()}};
  } else {
    j["adiabaticity_window"] = nullptr;
  }

  try {
    const LandauZenerDiagnostics lz = landau_zener_conditions(q, c.pulses, grid.t0, grid.t1);
    j["landau_zener"] = {{"crossing_found", lz.crossing_found},
                         {"hab_identically_zero", lz.hab_identically_zero},
                         {"t_cross", detail::number(lz.t_cross)},
                         {"hab_squared", detail::number(lz.hab_squared)},
                         {"half_slope", detail::number(lz.half_slope)},
                         {"max_nonadiabatic", lz.max_nonadiabatic},
                         {"min_gap", detail::number(lz.min_gap)},
                         {"max_ratio", lz.max_ratio},
                         {"note", lz.note}};
  } catch (const ModelError& err) {
    j["landau_zener"] = {{"error", err.what()}};
  }

  if (std::holds_alternative<SharedEnvelope>(c.pulses.pump) &&
      std::holds_alternative<SharedEnvelope>(c.pulses.stokes) &&
      std::holds_alternative<SharedEnvelope>(c.pulses.control)) {
    j["max_ionization_coincident"] = max_ionization_coincident(
        peak_rate(c.pulses.pump), peak_rate(c.pulses.stokes), peak_rate(c.pulses.control));
  }
  return j;
}

}  // namespace tripod
