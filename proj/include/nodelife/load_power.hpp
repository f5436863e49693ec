#pragma once

// Resistive load power, P = V^2 / R, and the series derived from it.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "nodelife/errors.hpp"
#include "nodelife/polyfit.hpp"

namespace nodelife {

inline constexpr double kOhmsPerKiloohm = 1000.0;

class LoadProfile {
 public:
  explicit LoadProfile(double ohms) : ohms_(ohms) {
    detail::require(std::isfinite(ohms_) && ohms_ > 0.0,
                    "LoadProfile: resistance must be finite and > 0");
  }
  static LoadProfile from_kiloohms(double kohm) { return LoadProfile(kohm * kOhmsPerKiloohm); }

  double ohms() const { return ohms_; }

 private:
  double ohms_;
};

struct SeriesPoint {
  double t;
  double value;

  bool operator==(const SeriesPoint&) const = default;
};

/// Time series with strictly increasing t. value is in the unit named by label.
struct PowerSeries {
  std::string label;
  std::vector<SeriesPoint> points;
};

struct LoadPoint {
  double ohms;
  double p_mw;
};

/// Milliwatts dissipated by `ohms` at `volts`.
inline double instantaneous_power(double volts, double ohms) {
  detail::require(ohms > 0.0, "instantaneous_power: resistance must be > 0");
  return volts * volts / ohms * 1000.0;
}

/// Milliamperes through `ohms` at `volts`.
inline double current_draw(double volts, double ohms) {
  detail::require(ohms > 0.0, "current_draw: resistance must be > 0");
  return volts / ohms * 1000.0;
}

inline void require_strictly_increasing(std::span<const double> grid, const char* who) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw DomainError(std::string(who) + ": time grid must be strictly increasing");
    }
  }
}

/// Power drawn by a fixed load as the curve's voltage declines.
inline PowerSeries power_curve(const DischargeCurve& curve, double ohms,
                               std::span<const double> t_grid) {
  detail::require(ohms > 0.0, "power_curve: resistance must be > 0");
  require_strictly_increasing(t_grid, "power_curve");
  PowerSeries out;
  out.label = "p_mw";
  out.points.reserve(t_grid.size());
  for (double t : t_grid) out.points.push_back({t, instantaneous_power(curve(t), ohms)});
  return out;
}

/// Power at one voltage across several loads.
inline std::vector<LoadPoint> load_sweep(double volts, std::span<const double> ohms_values) {
  std::vector<LoadPoint> out;
  out.reserve(ohms_values.size());
  for (double r : ohms_values) out.push_back({r, instantaneous_power(volts, r)});
  return out;
}

/// Evenly spaced grid t0, t0+step, ... not exceeding t1 (up to rounding).
inline std::vector<double> make_grid(double t0, double t1, double step) {
  detail::require(std::isfinite(t0) && std::isfinite(t1) && t1 >= t0,
                  "make_grid: need finite t0 <= t1");
  detail::require(std::isfinite(step) && step > 0.0, "make_grid: step must be > 0");
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / step * (1.0 + 1e-12))) + 1;
  std::vector<double> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(t0 + static_cast<double>(i) * step);
  return grid;
}

}  // namespace nodelife
