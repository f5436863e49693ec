#pragma once

// Analytic battery models: Peukert lifetime, rate-capacity factor,
// relaxation recovery and self-discharge.

#include <cmath>
#include <limits>

#include "nodelife/errors.hpp"

namespace nodelife {

inline constexpr double kHoursPerYear = 8760.0;

/// Exponents above this are accepted but flagged.
inline constexpr double kPeukertTypicalMax = 1.3;

struct BatterySpec {
  double capacity_mah = 220.0;
  double nominal_voltage = 3.0;
  double peukert_exponent = 1.0;
  double self_discharge_annual = 0.01;

  void validate() const {
    detail::require(std::isfinite(capacity_mah) && capacity_mah > 0.0,
                    "BatterySpec: capacity_mah must be > 0");
    detail::require(std::isfinite(nominal_voltage) && nominal_voltage > 0.0,
                    "BatterySpec: nominal_voltage must be > 0");
    detail::require(std::isfinite(peukert_exponent) && peukert_exponent >= 1.0,
                    "BatterySpec: peukert_exponent must be >= 1");
    detail::require(self_discharge_annual >= 0.0 && self_discharge_annual < 1.0,
                    "BatterySpec: self_discharge_annual must be in [0, 1)");
  }

  bool exponent_atypical() const { return peukert_exponent > kPeukertTypicalMax; }
};

/// Ratio of effective to maximum capacity, k in (0, 1].
class RateCapacityModel {
 public:
  explicit RateCapacityModel(double k = 1.0) : k_(k) {
    detail::require(k_ > 0.0 && k_ <= 1.0, "RateCapacityModel: k must be in (0, 1]");
  }
  double k() const { return k_; }

 private:
  double k_;
};

/// Exponential recovery of charge made unavailable by active discharge.
class RelaxationModel {
 public:
  RelaxationModel(double recoverable_fraction = 0.1, double recovery_time_constant_h = 10.0)
      : fraction_(recoverable_fraction), tau_(recovery_time_constant_h) {
    detail::require(fraction_ >= 0.0 && fraction_ <= 1.0,
                    "RelaxationModel: recoverable_fraction must be in [0, 1]");
    detail::require(std::isfinite(tau_) && tau_ > 0.0,
                    "RelaxationModel: recovery_time_constant must be > 0");
  }
  double recoverable_fraction() const { return fraction_; }
  double recovery_time_constant() const { return tau_; }

 private:
  double fraction_;
  double tau_;
};

/// Lifetime in hours, capacity / load^n with capacity in mAh and load in mA.
///
/// The power is taken on the raw mA value. For loads under 1 mA this makes
/// lifetime grow with n, which is the literal behaviour of the formula.
inline double peukert_lifetime(double capacity_mah, double load_ma, double exponent) {
  detail::require(capacity_mah > 0.0, "peukert_lifetime: capacity must be > 0");
  detail::require(load_ma > 0.0, "peukert_lifetime: load current must be > 0");
  detail::require(exponent >= 1.0, "peukert_lifetime: exponent must be >= 1");
  if (exponent == 1.0) return capacity_mah / load_ma;
  return capacity_mah / std::pow(load_ma, exponent);
}

inline double effective_capacity(double capacity_mah, const RateCapacityModel& model) {
  return model.k() * capacity_mah;
}

struct RateFactor {
  RateCapacityModel model;
  double literal_k;  // load^(1-n) before clamping
  bool clamped;      // literal_k exceeded 1
};

inline RateFactor rate_factor_from_peukert(double load_ma, double exponent) {
  detail::require(load_ma > 0.0, "rate_factor_from_peukert: load current must be > 0");
  detail::require(exponent >= 1.0, "rate_factor_from_peukert: exponent must be >= 1");
  const double literal = exponent == 1.0 ? 1.0 : std::pow(load_ma, 1.0 - exponent);
  if (literal > 1.0) return {RateCapacityModel(1.0), literal, true};
  return {RateCapacityModel(literal), literal, false};
}

inline double relaxation_recovery(double unavailable_mah, double idle_hours,
                                  const RelaxationModel& model) {
  detail::require(unavailable_mah >= 0.0, "relaxation_recovery: unavailable charge must be >= 0");
  detail::require(idle_hours >= 0.0, "relaxation_recovery: idle time must be >= 0");
  // -expm1(-x) == 1 - exp(-x) without cancellation for short rests.
  const double settled = -std::expm1(-idle_hours / model.recovery_time_constant());
  return model.recoverable_fraction() * unavailable_mah * settled;
}

/// Capacity left after elapsed_hours of shelf loss compounding at annual_fraction per year.
inline double self_discharge_residual(double capacity_mah, double elapsed_hours,
                                      double annual_fraction) {
  detail::require(capacity_mah >= 0.0, "self_discharge_residual: capacity must be >= 0");
  detail::require(elapsed_hours >= 0.0, "self_discharge_residual: elapsed time must be >= 0");
  detail::require(annual_fraction >= 0.0 && annual_fraction < 1.0,
                  "self_discharge_residual: annual fraction must be in [0, 1)");
  return capacity_mah * std::pow(1.0 - annual_fraction, elapsed_hours / kHoursPerYear);
}

}  // namespace nodelife
