#pragma once

// Node power and energy accounting.
//
// Units are fixed across the library: mW, mWh, hours, mA, mAh, volts, ohms.

#include <algorithm>
#include <cmath>

#include "nodelife/errors.hpp"

namespace nodelife {

/// Per-state power draw of one node, in milliwatts.
class PowerBreakdown {
 public:
  PowerBreakdown(double tx_mw, double rx_mw, double sleep_mw, double idle_mw)
      : tx_(tx_mw), rx_(rx_mw), sleep_(sleep_mw), idle_(idle_mw) {
    for (double p : {tx_, rx_, sleep_, idle_}) {
      detail::require(std::isfinite(p) && p >= 0.0,
                      "PowerBreakdown: state power must be finite and >= 0");
    }
  }

  double tx() const { return tx_; }
  double rx() const { return rx_; }
  double sleep() const { return sleep_; }
  double idle() const { return idle_; }

 private:
  double tx_;
  double rx_;
  double sleep_;
  double idle_;
};

/// Initial and consumed energy of a battery, in milliwatt-hours.
class EnergyLedger {
 public:
  EnergyLedger(double initial_mwh, double consumed_mwh)
      : initial_(initial_mwh), consumed_(consumed_mwh) {
    detail::require(std::isfinite(initial_) && initial_ >= 0.0,
                    "EnergyLedger: initial energy must be finite and >= 0");
    detail::require(std::isfinite(consumed_) && consumed_ >= 0.0,
                    "EnergyLedger: consumed energy must be finite and >= 0");
  }

  double initial() const { return initial_; }
  double consumed() const { return consumed_; }

  /// Signed difference; negative once more was drawn than stored.
  double unclamped_residual() const { return initial_ - consumed_; }

 private:
  double initial_;
  double consumed_;
};

inline double total_power(const PowerBreakdown& b) {
  return b.tx() + b.rx() + b.sleep() + b.idle();
}

inline double energy_consumed(double power_mw, double hours) {
  detail::require(power_mw >= 0.0 && hours >= 0.0,
                  "energy_consumed: power and time must be >= 0");
  return power_mw * hours;
}

inline double power_from_energy(double energy_mwh, double hours) {
  detail::require(hours > 0.0, "power_from_energy: time must be > 0");
  detail::require(energy_mwh >= 0.0, "power_from_energy: energy must be >= 0");
  return energy_mwh / hours;
}

/// Energy left in the battery, clamped at zero.
inline double residual_energy(const EnergyLedger& ledger) {
  return std::max(ledger.unclamped_residual(), 0.0);
}

}  // namespace nodelife
