#pragma once

// Polynomial discharge curves V(t) = a_0 + a_1 t + ... + a_m t^m.
//
// Fitting is ordinary least squares. The time axis is mapped onto [-1, 1]
// over the sample range and the system is solved by Householder QR; the
// solution is then expanded back into coefficients in hours. A raw quartic
// Vandermonde matrix over t in [0, 1200] h has a condition number near 1e15,
// so solving in hour units directly loses every significant digit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nodelife/errors.hpp"

namespace nodelife {

struct DischargeSample {
  double t = 0.0;  // hours
  double v = 0.0;  // volts

  bool operator==(const DischargeSample&) const = default;
};

struct DischargeCurve {
  std::vector<double> coeffs;  // ascending powers of t (hours)
  double t_min = 0.0;
  double t_max = 0.0;
  std::optional<double> rmse;  // absent for published presets

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  bool in_domain(double t) const { return t >= t_min && t <= t_max; }

  /// Horner evaluation.
  double operator()(double t) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
    return acc;
  }
};

struct VoltageReading {
  double volts;
  bool extrapolated;  // t lies outside [t_min, t_max]
};

inline VoltageReading evaluate(const DischargeCurve& curve, double t) {
  return {curve(t), !curve.in_domain(t)};
}

inline double rmse(const DischargeCurve& curve, std::span<const DischargeSample> samples) {
  if (samples.empty()) throw InputError("rmse: no samples");
  double sum = 0.0;
  for (const auto& s : samples) {
    const double r = s.v - curve(s.t);
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

namespace detail {

// Column-major dense matrix, just enough for a tall-skinny QR.
struct Dense {
  std::size_t rows;
  std::size_t cols;
  std::vector<double> data;

  Dense(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }
};

// Solves min ||A x - b|| by Householder QR. A and b are overwritten.
inline std::vector<double> householder_least_squares(Dense& a, std::vector<double>& b) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  std::vector<double> diag(n);
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm = std::hypot(norm, a(i, k));
    const double alpha = a(k, k) > 0.0 ? -norm : norm;
    diag[k] = alpha;
    if (norm == 0.0) continue;

    // v = x - alpha e_1, stored in place below the diagonal.
    a(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += a(i, k) * a(i, k);
    if (vnorm2 == 0.0) continue;

    auto reflect = [&](auto&& get) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += a(i, k) * get(i);
      const double scale = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) get(i) -= scale * a(i, k);
    };
    for (std::size_t j = k + 1; j < n; ++j) {
      reflect([&](std::size_t i) -> double& { return a(i, j); });
    }
    reflect([&](std::size_t i) -> double& { return b[i]; });
  }

  double largest = 0.0;
  for (double d : diag) largest = std::max(largest, std::abs(d));
  const double tol = static_cast<double>(std::max(m, n)) *
                     std::numeric_limits<double>::epsilon() * largest;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(std::abs(diag[k]) > tol)) {
      throw RankDeficient("rank deficient: design matrix column " + std::to_string(k) +
                          " is linearly dependent on lower-order columns");
    }
  }

  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = b[k];
    for (std::size_t j = k + 1; j < n; ++j) acc -= a(k, j) * x[j];
    x[k] = acc / diag[k];
  }
  return x;
}

// Coefficients of p(t) = sum_j b_j ((t - center) / half_width)^j in powers of t.
inline std::vector<double> expand_normalized(std::span<const double> b, double center,
                                             double half_width) {
  const std::size_t n = b.size();
  std::vector<double> out(n, 0.0);
  // binomial row and powers of (-center) are built incrementally per j
  std::vector<double> row(n, 0.0);
  double inv_h_pow = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    // row[i] = C(j, i)
    for (std::size_t i = j; i > 0; --i) row[i] += row[i - 1];
    row[0] = 1.0;
    double shift_pow = 1.0;  // (-center)^(j - i), i descending from j
    for (std::size_t i = j + 1; i-- > 0;) {
      out[i] += b[j] * row[i] * shift_pow * inv_h_pow;
      shift_pow *= -center;
    }
    inv_h_pow /= half_width;
  }
  return out;
}

}  // namespace detail

/// Least-squares polynomial of the given degree through the samples.
inline DischargeCurve fit(std::span<const DischargeSample> samples, int degree = 4) {
  if (degree < 0) throw DomainError("fit: degree must be >= 0");
  const auto needed = static_cast<std::size_t>(degree) + 1;
  if (samples.size() < needed) {
    throw InsufficientSamples("insufficient samples: degree " + std::to_string(degree) +
                              " needs at least " + std::to_string(needed) + ", got " +
                              std::to_string(samples.size()));
  }
  for (const auto& s : samples) {
    if (!std::isfinite(s.t) || s.t < 0.0 || !std::isfinite(s.v)) {
      throw DomainError("fit: samples need finite t >= 0 and finite v");
    }
  }

  std::vector<double> ts;
  ts.reserve(samples.size());
  for (const auto& s : samples) ts.push_back(s.t);
  std::sort(ts.begin(), ts.end());
  const auto distinct =
      static_cast<std::size_t>(std::unique(ts.begin(), ts.end()) - ts.begin());
  if (distinct < needed) {
    throw RankDeficient("rank deficient: " + std::to_string(distinct) +
                        " distinct t values cannot determine " + std::to_string(needed) +
                        " coefficients");
  }

  const double t_min = ts.front();
  const double t_max = ts[distinct - 1];
  const double center = 0.5 * (t_min + t_max);
  const double half_width = t_max > t_min ? 0.5 * (t_max - t_min) : 1.0;

  detail::Dense a(samples.size(), needed);
  std::vector<double> rhs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = (samples[i].t - center) / half_width;
    double p = 1.0;
    for (std::size_t j = 0; j < needed; ++j) {
      a(i, j) = p;
      p *= x;
    }
    rhs[i] = samples[i].v;
  }
  const auto normalized = detail::householder_least_squares(a, rhs);

  DischargeCurve curve;
  curve.coeffs = detail::expand_normalized(normalized, center, half_width);
  curve.t_min = t_min;
  curve.t_max = t_max;
  curve.rmse = rmse(curve, samples);
  return curve;
}

inline constexpr double kCrossingScanStep = 1.0;       // hours
inline constexpr double kCrossingTolerance = 1e-3;     // hours

/// Earliest downward crossing of `threshold` in [t_lo, t_hi].
///
/// The curve is sampled on a 1 h grid from t_lo. The search arms at the first
/// grid point at or above the threshold; the first later point at or below it
/// brackets the crossing, which is then bisected to 1e-3 h. A curve already
/// sitting exactly on the threshold at an armed point crosses there. Returns
/// nullopt when the curve never comes down to the threshold from above, which
/// includes thresholds above the whole curve. Dips narrower than the scan
/// step can be missed.
inline std::optional<double> time_to_voltage(const DischargeCurve& curve, double threshold,
                                             double t_lo, double t_hi) {
  detail::require(!std::isnan(threshold), "time_to_voltage: threshold is NaN");
  detail::require(std::isfinite(t_lo) && std::isfinite(t_hi) && t_lo < t_hi,
                  "time_to_voltage: search range must satisfy t_lo < t_hi");

  bool armed = false;
  double prev = t_lo;
  for (long k = 0;; ++k) {
    const double t = std::min(t_lo + static_cast<double>(k) * kCrossingScanStep, t_hi);
    const double v = curve(t);
    if (!armed) {
      armed = v >= threshold;
      if (armed && v == threshold) return t;
    } else if (v <= threshold) {
      double lo = prev;
      double hi = t;
      while (hi - lo > kCrossingTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (curve(mid) <= threshold) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    if (t >= t_hi) return std::nullopt;
    prev = t;
  }
}

inline constexpr std::array<std::string_view, 3> kPresetNames = {"freescale_1s", "farnell_15k",
                                                                 "farnell_7k5"};

inline std::string preset_names_joined() {
  std::string out;
  for (auto name : kPresetNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

/// Published quartic discharge curves, coefficients as printed.
///
/// freescale_1s rises over most of [0, 1200] h as printed; farnell_7k5 reads
/// about 3.8 V at 500 h. Both are kept verbatim.
inline DischargeCurve preset(std::string_view name) {
  if (name == "freescale_1s") return {{3.16, 0.00309, 1.125e-5, -1.36e-8, 4.255e-12}, 0.0, 1200.0, {}};
  if (name == "farnell_15k") return {{3.292, -0.0012, -2.464e-6, 8.92e-9, -6.3e-12}, 0.0, 1200.0, {}};
  if (name == "farnell_7k5") return {{3.292, -0.0015, 1.32e-5, 4.63e-9, -4.17e-11}, 0.0, 1200.0, {}};
  throw InputError("unknown preset '" + std::string(name) + "'; valid names: " +
                   preset_names_joined());
}

}  // namespace nodelife
