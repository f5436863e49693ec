#pragma once

// CSV and JSON ingestion/emission and the simulation config schema.
//
// Doubles are always printed in shortest round-trip form so that anything
// written here parses back to the identical bit pattern.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <initializer_list>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "nodelife/battery_models.hpp"
#include "nodelife/errors.hpp"
#include "nodelife/load_power.hpp"
#include "nodelife/node_sim.hpp"
#include "nodelife/polyfit.hpp"

namespace nodelife::io {

using json = nlohmann::ordered_json;

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr int kConfigSchemaVersion = 1;

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double out = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

// ---------------------------------------------------------------------------
// discharge CSV

/// Reads `t_hours,v_volts` (or `t_seconds,v_volts`) samples in file order.
inline std::vector<DischargeSample> parse_discharge_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<bool> in_seconds;
  std::vector<DischargeSample> samples;

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;

    if (!in_seconds) {
      const auto cols = split(text, ',');
      const auto time_col = trim(cols[0]);
      if (cols.size() != 2 || trim(cols[1]) != "v_volts" ||
          (time_col != "t_hours" && time_col != "t_seconds")) {
        throw InputError("line " + std::to_string(line_no) + ": unknown header '" +
                         std::string(text) + "'; expected 't_hours,v_volts' or 't_seconds,v_volts'");
      }
      in_seconds = time_col == "t_seconds";
      continue;
    }

    const auto cols = split(text, ',');
    if (cols.size() != 2) {
      throw InputError("line " + std::to_string(line_no) + ": expected 2 fields, got " +
                       std::to_string(cols.size()));
    }
    const auto t = parse_double(cols[0]);
    const auto v = parse_double(cols[1]);
    if (!t || !v || !std::isfinite(*t) || !std::isfinite(*v)) {
      throw InputError("line " + std::to_string(line_no) + ": malformed number");
    }
    if (*t < 0.0) throw InputError("line " + std::to_string(line_no) + ": negative time");
    samples.push_back({*in_seconds ? *t / kSecondsPerHour : *t, *v});
  }
  if (!in_seconds) throw InputError("missing header: expected 't_hours,v_volts'");
  if (samples.empty()) throw InputError("no data rows");
  return samples;
}

inline std::vector<DischargeSample> parse_discharge_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_discharge_csv(in);
}

inline std::vector<DischargeSample> read_discharge_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_discharge_csv(in);
}

inline void write_discharge_csv(std::span<const DischargeSample> samples, std::ostream& out) {
  out << "t_hours,v_volts\n";
  for (const auto& s : samples) out << format_double(s.t) << ',' << format_double(s.v) << '\n';
}

// ---------------------------------------------------------------------------
// series

enum class Format { csv, json };

inline Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw InputError("unknown format '" + std::string(name) + "'; expected csv or json");
}

/// CSV with an `x_label,y_label` header, or a JSON array of [x, y] pairs.
inline void emit_series(std::span<const SeriesPoint> points, std::string_view x_label,
                        std::string_view y_label, Format format, std::ostream& out) {
  if (format == Format::csv) {
    out << x_label << ',' << y_label << '\n';
    for (const auto& p : points) out << format_double(p.t) << ',' << format_double(p.value) << '\n';
    return;
  }
  out << '[';
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out << ',';
    out << '[' << format_double(points[i].t) << ',' << format_double(points[i].value) << ']';
  }
  out << "]\n";
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

inline void emit_series(std::span<const SeriesPoint> points, std::string_view x_label,
                        std::string_view y_label, Format format, const std::string& path) {
  auto out = open_for_write(path);
  emit_series(points, x_label, y_label, format, out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// discharge curve JSON: {"degree", "coeffs", "t_min", "t_max"[, "rmse"]}

inline json curve_to_json(const DischargeCurve& curve) {
  json j;
  j["degree"] = curve.degree();
  j["coeffs"] = curve.coeffs;
  j["t_min"] = curve.t_min;
  j["t_max"] = curve.t_max;
  if (curve.rmse) j["rmse"] = *curve.rmse;
  return j;
}

namespace detail {

inline void reject_unknown_keys(const json& obj, std::string_view where,
                                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw InputError(std::string(where) + " must be a JSON object");
  std::string unknown;
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) {
    throw InputError(std::string(where) + ": unknown key(s): " + unknown);
  }
}

inline std::optional<double> number_field(const json& obj, std::string_view where,
                                          const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_number()) {
    throw InputError(std::string(where) + "." + key + " must be a number");
  }
  return it->get<double>();
}

inline double required_number(const json& obj, std::string_view where, const char* key) {
  auto v = number_field(obj, where, key);
  if (!v) throw InputError(std::string(where) + "." + key + " is required");
  return *v;
}

inline bool bool_field(const json& obj, std::string_view where, const char* key, bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw InputError(std::string(where) + "." + key + " must be a boolean");
  return it->get<bool>();
}

}  // namespace detail

inline DischargeCurve curve_from_json(const json& j, std::string_view where = "curve") {
  detail::reject_unknown_keys(j, where, {"degree", "coeffs", "t_min", "t_max", "rmse"});
  const auto coeffs = j.find("coeffs");
  if (coeffs == j.end() || !coeffs->is_array() || coeffs->empty()) {
    throw InputError(std::string(where) + ".coeffs must be a nonempty array");
  }
  DischargeCurve curve;
  for (const auto& c : *coeffs) {
    if (!c.is_number()) throw InputError(std::string(where) + ".coeffs must hold numbers");
    curve.coeffs.push_back(c.get<double>());
  }
  const auto degree = j.find("degree");
  if (degree != j.end()) {
    if (!degree->is_number_integer() || degree->get<int>() != curve.degree()) {
      throw InputError(std::string(where) + ".degree must equal len(coeffs) - 1");
    }
  }
  curve.t_min = detail::required_number(j, where, "t_min");
  curve.t_max = detail::required_number(j, where, "t_max");
  if (curve.t_max < curve.t_min) throw InputError(std::string(where) + ": t_max < t_min");
  curve.rmse = detail::number_field(j, where, "rmse");
  return curve;
}

inline json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

inline DischargeCurve read_curve(const std::string& path) {
  return curve_from_json(parse_json_file(path));
}

inline void write_curve(const DischargeCurve& curve, std::ostream& out) {
  out << curve_to_json(curve).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// simulation config
//
// {
//   "schema": 1,
//   "battery":    {"capacity_mah", "nominal_voltage", "peukert_exponent",
//                  "self_discharge_annual"},
//   "duty_cycle": {"tx_current_ma", "rx_current_ma", "sleep_current_ma",
//                  "idle_current_ma", "fraction_tx", "fraction_rx",
//                  "fraction_sleep", "fraction_idle",
//                  "curve" | "preset", "reference_current_ma"},
//   "load":       {"kohm", "constant_voltage" | "curve" | "preset"},
//   "sim":        {"timestep_h", "horizon_h", "cutoff_voltage",
//                  "peukert", "relaxation", "self_discharge"},
//   "relaxation": {"recoverable_fraction", "recovery_time_constant_h"}
// }
//
// Exactly one of duty_cycle and load. Everything except schema,
// battery.capacity_mah, load.kohm and the load voltage source is optional.

namespace detail {

inline std::optional<DischargeCurve> curve_or_preset(const json& section, std::string_view where) {
  const bool has_curve = section.contains("curve");
  const bool has_preset = section.contains("preset");
  if (has_curve && has_preset) {
    throw InputError(std::string(where) + ": give either curve or preset, not both");
  }
  if (has_curve) return curve_from_json(section["curve"], std::string(where) + ".curve");
  if (has_preset) {
    if (!section["preset"].is_string()) {
      throw InputError(std::string(where) + ".preset must be a string");
    }
    return preset(section["preset"].get<std::string>());
  }
  return std::nullopt;
}

}  // namespace detail

inline SimConfig config_from_json(const json& doc) {
  detail::reject_unknown_keys(doc, "config",
                              {"schema", "battery", "duty_cycle", "load", "sim", "relaxation"});
  const auto schema = doc.find("schema");
  if (schema == doc.end() || !schema->is_number_integer() ||
      schema->get<int>() != kConfigSchemaVersion) {
    throw InputError("config: \"schema\": 1 is required");
  }

  SimConfig cfg;

  if (!doc.contains("battery")) throw InputError("config: battery section is required");
  const auto& bat = doc["battery"];
  detail::reject_unknown_keys(bat, "battery", {"capacity_mah", "nominal_voltage",
                                               "peukert_exponent", "self_discharge_annual"});
  cfg.battery.capacity_mah = detail::required_number(bat, "battery", "capacity_mah");
  if (auto v = detail::number_field(bat, "battery", "nominal_voltage")) cfg.battery.nominal_voltage = *v;
  if (auto v = detail::number_field(bat, "battery", "peukert_exponent")) cfg.battery.peukert_exponent = *v;
  if (auto v = detail::number_field(bat, "battery", "self_discharge_annual")) {
    cfg.battery.self_discharge_annual = *v;
  }

  const bool has_duty = doc.contains("duty_cycle");
  const bool has_load = doc.contains("load");
  if (has_duty == has_load) throw InputError("config: exactly one of duty_cycle or load is required");

  if (has_duty) {
    const auto& dc = doc["duty_cycle"];
    detail::reject_unknown_keys(
        dc, "duty_cycle",
        {"tx_current_ma", "rx_current_ma", "sleep_current_ma", "idle_current_ma", "fraction_tx",
         "fraction_rx", "fraction_sleep", "fraction_idle", "curve", "preset",
         "reference_current_ma"});
    DutyCycleSource src;
    auto& p = src.profile;
    const auto get = [&](const char* key) {
      return detail::number_field(dc, "duty_cycle", key).value_or(0.0);
    };
    p.tx_current_ma = get("tx_current_ma");
    p.rx_current_ma = get("rx_current_ma");
    p.sleep_current_ma = get("sleep_current_ma");
    p.idle_current_ma = get("idle_current_ma");
    p.fraction_tx = get("fraction_tx");
    p.fraction_rx = get("fraction_rx");
    p.fraction_sleep = get("fraction_sleep");
    p.fraction_idle = get("fraction_idle");
    src.curve = detail::curve_or_preset(dc, "duty_cycle");
    src.reference_current_ma = detail::number_field(dc, "duty_cycle", "reference_current_ma");
    cfg.source = std::move(src);
  } else {
    const auto& ld = doc["load"];
    detail::reject_unknown_keys(ld, "load", {"kohm", "constant_voltage", "curve", "preset"});
    const double kohm = detail::required_number(ld, "load", "kohm");
    auto curve = detail::curve_or_preset(ld, "load");
    auto constant = detail::number_field(ld, "load", "constant_voltage");
    if (curve.has_value() == constant.has_value()) {
      throw InputError("load: exactly one of constant_voltage, curve or preset is required");
    }
    std::variant<double, DischargeCurve> voltage;
    if (curve) {
      voltage = std::move(*curve);
    } else {
      voltage = *constant;
    }
    cfg.source = ResistiveSource{LoadProfile::from_kiloohms(kohm), std::move(voltage)};
  }

  if (doc.contains("sim")) {
    const auto& sim = doc["sim"];
    detail::reject_unknown_keys(sim, "sim", {"timestep_h", "horizon_h", "cutoff_voltage", "peukert",
                                             "relaxation", "self_discharge"});
    if (auto v = detail::number_field(sim, "sim", "timestep_h")) cfg.timestep_h = *v;
    if (auto v = detail::number_field(sim, "sim", "horizon_h")) cfg.horizon_h = *v;
    cfg.cutoff_voltage = detail::number_field(sim, "sim", "cutoff_voltage");
    cfg.flags.peukert = detail::bool_field(sim, "sim", "peukert", false);
    cfg.flags.relaxation = detail::bool_field(sim, "sim", "relaxation", false);
    cfg.flags.self_discharge = detail::bool_field(sim, "sim", "self_discharge", false);
  }

  if (doc.contains("relaxation")) {
    const auto& rel = doc["relaxation"];
    detail::reject_unknown_keys(rel, "relaxation",
                                {"recoverable_fraction", "recovery_time_constant_h"});
    const RelaxationModel defaults;
    cfg.relaxation = RelaxationModel(
        detail::number_field(rel, "relaxation", "recoverable_fraction")
            .value_or(defaults.recoverable_fraction()),
        detail::number_field(rel, "relaxation", "recovery_time_constant_h")
            .value_or(defaults.recovery_time_constant()));
  }

  cfg.validate();
  return cfg;
}

inline SimConfig read_config(const std::string& path) {
  return config_from_json(parse_json_file(path));
}

// ---------------------------------------------------------------------------
// simulation trace

inline void emit_trace(const SimTrace& trace, Format format, std::ostream& out) {
  if (format == Format::csv) {
    out << "t_hours,residual_mah,voltage_v,state\n";
    for (const auto& r : trace.records) {
      out << format_double(r.t) << ',' << format_double(r.residual_mah) << ','
          << (r.voltage ? format_double(*r.voltage) : std::string()) << ',' << r.state << '\n';
    }
    return;
  }
  const auto life = lifetime(trace);
  out << "{\"termination\":\"" << termination_name(trace.reason) << "\""
      << ",\"lifetime_h\":" << format_double(life.hours)
      << ",\"censored\":" << (life.censored ? "true" : "false")
      << ",\"columns\":[\"t_hours\",\"residual_mah\",\"voltage_v\",\"state\",\"unavailable_mah\"]"
      << ",\"records\":[";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (i) out << ',';
    out << '[' << format_double(r.t) << ',' << format_double(r.residual_mah) << ','
        << (r.voltage ? format_double(*r.voltage) : std::string("null")) << ",\"" << r.state
        << "\"," << format_double(r.unavailable_mah) << ']';
  }
  out << "]}\n";
}

}  // namespace nodelife::io
