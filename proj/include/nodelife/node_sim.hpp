#pragma once

// Discrete-time drain of a single node's battery.
//
// Each step of length dt is split into the duty-cycle states in the order
// tx, rx, sleep, idle, each lasting fraction * dt. A resistive source is a
// single "load" segment whose current follows Ohm's law at the voltage seen
// at the start of the step.
//
// Charge bookkeeping per run:
//
//   initial = residual + unavailable + drained + self_discharged
//
// drained is everything taken from the battery by the load, including the
// Peukert excess over the charge the load actually received (delivered).
// unavailable is charge locked by active (tx, rx, load) discharge while
// relaxation is enabled; sleep and idle segments release it back into
// residual through relaxation_recovery.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "nodelife/battery_models.hpp"
#include "nodelife/energy_model.hpp"
#include "nodelife/errors.hpp"
#include "nodelife/load_power.hpp"
#include "nodelife/polyfit.hpp"

namespace nodelife {

enum class NodeState { tx, rx, sleep, idle };

inline constexpr std::string_view state_name(NodeState s) {
  switch (s) {
    case NodeState::tx: return "tx";
    case NodeState::rx: return "rx";
    case NodeState::sleep: return "sleep";
    case NodeState::idle: return "idle";
  }
  return "?";
}

inline constexpr double kFractionSumTolerance = 1e-9;

struct DutyCycleProfile {
  double tx_current_ma = 0.0;
  double rx_current_ma = 0.0;
  double sleep_current_ma = 0.0;
  double idle_current_ma = 0.0;
  double fraction_tx = 0.0;
  double fraction_rx = 0.0;
  double fraction_sleep = 0.0;
  double fraction_idle = 0.0;

  /// Single-state profile drawing `ma` all the time (booked as tx).
  static DutyCycleProfile constant(double ma) {
    DutyCycleProfile p;
    p.tx_current_ma = ma;
    p.fraction_tx = 1.0;
    return p;
  }

  std::array<double, 4> currents() const {
    return {tx_current_ma, rx_current_ma, sleep_current_ma, idle_current_ma};
  }
  std::array<double, 4> fractions() const {
    return {fraction_tx, fraction_rx, fraction_sleep, fraction_idle};
  }

  void validate() const {
    double sum = 0.0;
    for (double c : currents()) {
      detail::require(std::isfinite(c) && c >= 0.0, "DutyCycleProfile: currents must be >= 0");
    }
    for (double f : fractions()) {
      detail::require(std::isfinite(f) && f >= 0.0, "DutyCycleProfile: fractions must be >= 0");
      sum += f;
    }
    detail::require(std::abs(sum - 1.0) <= kFractionSumTolerance,
                    "DutyCycleProfile: fractions must sum to 1");
  }
};

inline constexpr std::array<NodeState, 4> kStateOrder = {NodeState::tx, NodeState::rx,
                                                          NodeState::sleep, NodeState::idle};

/// Time-weighted mean current in mA.
inline double average_current(const DutyCycleProfile& profile) {
  const auto c = profile.currents();
  const auto f = profile.fractions();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) sum += f[i] * c[i];
  return sum;
}

/// Duty-cycled node. Voltage is reported only when a curve and the current
/// it was measured at are both given; the curve is then read at
/// t * average_current / reference_current.
struct DutyCycleSource {
  DutyCycleProfile profile;
  std::optional<DischargeCurve> curve;
  std::optional<double> reference_current_ma;
};

/// Fixed resistor across the battery; voltage is a constant or a discharge curve.
struct ResistiveSource {
  LoadProfile load;
  std::variant<double, DischargeCurve> voltage;
};

struct SimFlags {
  bool peukert = false;
  bool relaxation = false;
  bool self_discharge = false;
};

struct SimConfig {
  BatterySpec battery;
  std::variant<DutyCycleSource, ResistiveSource> source = DutyCycleSource{};
  double timestep_h = 0.1;
  double horizon_h = 10000.0;
  std::optional<double> cutoff_voltage;
  SimFlags flags;
  RelaxationModel relaxation;

  void validate() const {
    battery.validate();
    detail::require(std::isfinite(timestep_h) && timestep_h > 0.0,
                    "SimConfig: timestep must be > 0");
    detail::require(std::isfinite(horizon_h) && horizon_h > 0.0, "SimConfig: horizon must be > 0");
    detail::require(timestep_h <= horizon_h, "SimConfig: timestep must not exceed horizon");
    if (cutoff_voltage) {
      detail::require(std::isfinite(*cutoff_voltage), "SimConfig: cutoff voltage must be finite");
    }
    if (const auto* duty = std::get_if<DutyCycleSource>(&source)) {
      duty->profile.validate();
      if (duty->reference_current_ma) {
        detail::require(*duty->reference_current_ma > 0.0,
                        "SimConfig: reference current must be > 0");
      }
    } else {
      const auto& res = std::get<ResistiveSource>(source);
      if (const auto* v = std::get_if<double>(&res.voltage)) {
        detail::require(std::isfinite(*v), "SimConfig: constant voltage must be finite");
      } else {
        detail::require(!std::get<DischargeCurve>(res.voltage).coeffs.empty(),
                        "SimConfig: discharge curve has no coefficients");
      }
    }
  }
};

enum class Termination { exhausted, cutoff_reached, horizon };

inline constexpr std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::exhausted: return "exhausted";
    case Termination::cutoff_reached: return "cutoff_reached";
    case Termination::horizon: return "horizon";
  }
  return "?";
}

struct TraceRecord {
  double t;             // hours
  double residual_mah;  // available charge
  std::optional<double> voltage;
  std::string_view state;  // "init", "load" or the dominant duty-cycle state
  double unavailable_mah;
};

struct SimDiagnostics {
  double drained_mah = 0.0;
  double delivered_mah = 0.0;
  double self_discharged_mah = 0.0;
  double shortfall_mah = 0.0;  // load demand left unmet in the final step
  double energy_initial_mwh = 0.0;
  double energy_consumed_mwh = 0.0;
  double energy_residual_mwh = 0.0;            // clamped at zero
  double energy_residual_unclamped_mwh = 0.0;  // may be negative
  bool rate_factor_clamped = false;
  bool voltage_extrapolated = false;
  std::size_t steps = 0;
};

struct SimTrace {
  std::vector<TraceRecord> records;
  Termination reason = Termination::horizon;
  double end_time_h = 0.0;  // interpolated exhaustion time, cutoff step time or horizon
  double horizon_h = 0.0;
  double timestep_h = 0.0;
  double initial_capacity_mah = 0.0;
  SimDiagnostics diagnostics;

  /// residual + unavailable + drained + self_discharged; equals the initial capacity.
  double accounted_mah() const {
    const auto& last = records.back();
    return last.residual_mah + last.unavailable_mah + diagnostics.drained_mah +
           diagnostics.self_discharged_mah;
  }
};

struct Lifetime {
  double hours;
  bool censored;  // run hit the horizon; hours is the horizon
};

inline Lifetime lifetime(const SimTrace& trace) {
  if (trace.reason == Termination::horizon) return {trace.horizon_h, true};
  return {trace.end_time_h, false};
}

namespace detail {

struct Segment {
  std::string_view state;
  double current_ma;
  double duration_h;
  bool active;
};

class Simulator {
 public:
  explicit Simulator(const SimConfig& config) : cfg_(config) {
    cfg_.validate();
    residual_ = cfg_.battery.capacity_mah;
    if (cfg_.flags.self_discharge) {
      step_retention_ =
          self_discharge_residual(1.0, cfg_.timestep_h, cfg_.battery.self_discharge_annual);
    }
    if (const auto* duty = std::get_if<DutyCycleSource>(&cfg_.source)) {
      avg_current_ = average_current(duty->profile);
      const auto f = duty->profile.fractions();
      dominant_ = state_name(
          kStateOrder[static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin())]);
    }
  }

  SimTrace run() {
    SimTrace trace;
    trace.horizon_h = cfg_.horizon_h;
    trace.timestep_h = cfg_.timestep_h;
    trace.initial_capacity_mah = cfg_.battery.capacity_mah;

    const double dt = cfg_.timestep_h;
    const auto steps = static_cast<std::size_t>(
        std::ceil(cfg_.horizon_h / dt * (1.0 - 1e-12)));
    trace.records.reserve(std::min<std::size_t>(steps + 1, 1u << 20));

    auto v0 = voltage_at(0.0);
    trace.records.push_back({0.0, residual_, v0, "init", unavailable()});
    if (below_cutoff(v0)) {
      return finish(std::move(trace), Termination::cutoff_reached, 0.0);
    }

    for (std::size_t k = 0; k < steps; ++k) {
      const double t0 = static_cast<double>(k) * dt;
      const double t1 = static_cast<double>(k + 1) * dt;
      const auto v_start = voltage_at(t0);
      const auto exhausted_at = advance(t0, v_start);
      ++diag_.steps;

      if (exhausted_at) {
        trace.records.push_back({t1, residual_, voltage_at(t1), step_label(), unavailable()});
        return finish(std::move(trace), Termination::exhausted, *exhausted_at);
      }
      if (cfg_.flags.self_discharge) {
        const double kept = residual_ * step_retention_;
        diag_.self_discharged_mah += residual_ - kept;
        residual_ = kept;
      }
      const auto v_end = voltage_at(t1);
      trace.records.push_back({t1, residual_, v_end, step_label(), unavailable()});
      if (below_cutoff(v_end)) return finish(std::move(trace), Termination::cutoff_reached, t1);
    }
    return finish(std::move(trace), Termination::horizon,
                  static_cast<double>(steps) * dt);
  }

 private:
  double unavailable() const { return cfg_.relaxation.recoverable_fraction() * backlog_; }

  std::string_view step_label() const {
    return std::holds_alternative<ResistiveSource>(cfg_.source) ? "load" : dominant_;
  }

  bool below_cutoff(const std::optional<double>& v) const {
    return cfg_.cutoff_voltage && v && *v <= *cfg_.cutoff_voltage;
  }

  std::optional<double> voltage_at(double t) {
    if (const auto* res = std::get_if<ResistiveSource>(&cfg_.source)) {
      if (const auto* v = std::get_if<double>(&res->voltage)) return *v;
      const auto reading = evaluate(std::get<DischargeCurve>(res->voltage), t);
      diag_.voltage_extrapolated |= reading.extrapolated;
      return reading.volts;
    }
    const auto& duty = std::get<DutyCycleSource>(cfg_.source);
    if (!duty.curve || !duty.reference_current_ma) return std::nullopt;
    const auto reading = evaluate(*duty.curve, t * avg_current_ / *duty.reference_current_ma);
    diag_.voltage_extrapolated |= reading.extrapolated;
    return reading.volts;
  }

  // Peukert drain multiplier 1/k for a segment current.
  double drain_factor(double current_ma) {
    if (!cfg_.flags.peukert || current_ma <= 0.0) return 1.0;
    const auto rf = rate_factor_from_peukert(current_ma, cfg_.battery.peukert_exponent);
    diag_.rate_factor_clamped |= rf.clamped;
    return 1.0 / rf.model.k();
  }

  // Drains one step. Returns the exhaustion time if the battery ran dry.
  std::optional<double> advance(double t0, const std::optional<double>& v_start) {
    std::array<Segment, 4> segments{};
    std::size_t count = 0;
    if (const auto* res = std::get_if<ResistiveSource>(&cfg_.source)) {
      const double current = std::max(0.0, current_draw(v_start.value(), res->load.ohms()));
      segments[count++] = {"load", current, cfg_.timestep_h, true};
    } else {
      const auto& profile = std::get<DutyCycleSource>(cfg_.source).profile;
      const auto c = profile.currents();
      const auto f = profile.fractions();
      for (std::size_t i = 0; i < kStateOrder.size(); ++i) {
        if (f[i] <= 0.0) continue;
        const auto s = kStateOrder[i];
        segments[count++] = {state_name(s), c[i], f[i] * cfg_.timestep_h,
                             s == NodeState::tx || s == NodeState::rx};
      }
    }

    const double volts_for_energy = v_start.value_or(cfg_.battery.nominal_voltage);
    const double lock_fraction =
        cfg_.flags.relaxation ? cfg_.relaxation.recoverable_fraction() : 0.0;
    double elapsed = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const auto& seg = segments[i];
      const double demand = seg.current_ma * seg.duration_h;
      const double cost = demand * drain_factor(seg.current_ma);
      const double locked = seg.active ? lock_fraction * cost : 0.0;
      const double take = cost + locked;

      if (take > 0.0 && take >= residual_) {
        const double part = residual_ / take;
        diag_.drained_mah += part * cost;
        diag_.delivered_mah += part * demand;
        diag_.shortfall_mah = (1.0 - part) * demand;
        diag_.energy_consumed_mwh += part * demand * volts_for_energy;
        if (lock_fraction > 0.0) backlog_ += part * cost;
        residual_ = 0.0;
        return t0 + elapsed + part * seg.duration_h;
      }

      residual_ -= take;
      diag_.drained_mah += cost;
      diag_.delivered_mah += demand;
      diag_.energy_consumed_mwh += demand * volts_for_energy;
      if (seg.active) {
        if (lock_fraction > 0.0) backlog_ += cost;
      } else if (cfg_.flags.relaxation && backlog_ > 0.0) {
        // relaxation_recovery returns fraction * backlog * settled, i.e. the
        // share of the locked pool that comes back over this rest.
        const double recovered = relaxation_recovery(backlog_, seg.duration_h, cfg_.relaxation);
        residual_ += recovered;
        backlog_ -= recovered / lock_fraction;
        backlog_ = std::max(backlog_, 0.0);
      }
      elapsed += seg.duration_h;
    }
    return std::nullopt;
  }

  SimTrace finish(SimTrace trace, Termination reason, double end_time) {
    trace.reason = reason;
    trace.end_time_h = end_time;
    diag_.energy_initial_mwh = cfg_.battery.capacity_mah * cfg_.battery.nominal_voltage;
    const EnergyLedger ledger(diag_.energy_initial_mwh, diag_.energy_consumed_mwh);
    diag_.energy_residual_mwh = residual_energy(ledger);
    diag_.energy_residual_unclamped_mwh = ledger.unclamped_residual();
    trace.diagnostics = diag_;
    return trace;
  }

  SimConfig cfg_;
  double residual_ = 0.0;
  double backlog_ = 0.0;  // active drain not yet relaxed; unavailable = fraction * backlog
  double step_retention_ = 1.0;
  double avg_current_ = 0.0;
  std::string_view dominant_ = "tx";
  SimDiagnostics diag_;
};

}  // namespace detail

/// Runs the configured drain until exhaustion, cutoff or the horizon.
inline SimTrace simulate(const SimConfig& config) { return detail::Simulator(config).run(); }

}  // namespace nodelife
