#pragma once

// Batch command line front end.
//
//   fit        least-squares discharge curve from a CSV file
//   eval       curve voltage at one time or over a grid
//   threshold  earliest time the curve falls to a voltage
//   lifetime   Peukert lifetime for a capacity and load current
//   power      P = V^2/R over a curve, or across several loads
//   simulate   run a JSON-configured battery drain
//
// Exit codes: 0 success, 1 usage error, 2 input-data error,
// 3 numerical error (rank-deficient fit).

#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nodelife/battery_models.hpp"
#include "nodelife/errors.hpp"
#include "nodelife/io.hpp"
#include "nodelife/load_power.hpp"
#include "nodelife/node_sim.hpp"
#include "nodelife/polyfit.hpp"

namespace nodelife::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInputData = 2, kNumerical = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

inline std::vector<double> parse_numbers(const std::string& text, char sep, std::size_t arity,
                                         const char* what) {
  std::vector<double> out;
  for (auto part : io::split(text, sep)) {
    auto v = io::parse_double(part);
    if (!v) throw UsageError(std::string("malformed ") + what + " '" + text + "'");
    out.push_back(*v);
  }
  if (arity != 0 && out.size() != arity) {
    throw UsageError(std::string("malformed ") + what + " '" + text + "'");
  }
  return out;
}

inline std::vector<double> parse_grid(const std::string& text) {
  const auto g = parse_numbers(text, ':', 3, "grid (expected T0:T1:STEP)");
  if (!(g[2] > 0.0) || g[1] < g[0]) {
    throw UsageError("grid '" + text + "' needs T0 <= T1 and STEP > 0");
  }
  return make_grid(g[0], g[1], g[2]);
}

struct CurveSource {
  std::string curve_path;
  std::string preset_name;

  void attach(CLI::App* cmd) {
    auto* c = cmd->add_option("--curve", curve_path, "discharge curve JSON file");
    auto* p = cmd->add_option("--preset", preset_name,
                              "published curve: " + preset_names_joined());
    c->excludes(p);
  }

  DischargeCurve load() const {
    if (!curve_path.empty()) return io::read_curve(curve_path);
    if (preset_name.empty()) throw UsageError("one of --curve or --preset is required");
    for (auto name : kPresetNames) {
      if (preset_name == name) return preset(name);
    }
    throw UsageError("unknown preset '" + preset_name + "'; valid names: " +
                     preset_names_joined());
  }
};

// Writes to --out when given, else to the result stream.
inline void with_output(const std::string& path, std::ostream& out,
                        const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(out);
    return;
  }
  auto file = io::open_for_write(path);
  body(file);
  if (!file) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

/// Parses and executes one command line. args excludes the program name.
inline int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Battery discharge modeling and node lifetime toolkit", "nodelife"};
  app.require_subcommand(1);

  // fit
  std::string fit_input, fit_out;
  int fit_degree = 4;
  auto* fit_cmd = app.add_subcommand("fit", "fit a polynomial discharge curve to CSV samples");
  fit_cmd->add_option("--input", fit_input, "CSV with t_hours,v_volts or t_seconds,v_volts")
      ->required();
  fit_cmd->add_option("--degree", fit_degree, "polynomial degree")->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "curve JSON destination")->required();

  // eval
  detail::CurveSource eval_src;
  std::optional<double> eval_at;
  std::string eval_grid, eval_out, eval_format = "csv";
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a discharge curve");
  eval_src.attach(eval_cmd);
  auto* at_opt = eval_cmd->add_option("--at", eval_at, "time in hours");
  auto* grid_opt = eval_cmd->add_option("--grid", eval_grid, "T0:T1:STEP in hours");
  at_opt->excludes(grid_opt);
  eval_cmd->add_option("--out", eval_out, "series destination (default stdout)");
  eval_cmd->add_option("--format", eval_format, "csv or json")->capture_default_str();

  // threshold
  detail::CurveSource thr_src;
  double thr_voltage = 0.0;
  std::string thr_range;
  bool thr_json = false;
  auto* thr_cmd = app.add_subcommand("threshold", "earliest time the curve reaches a voltage");
  thr_src.attach(thr_cmd);
  thr_cmd->add_option("--voltage", thr_voltage, "threshold in volts")->required();
  thr_cmd->add_option("--range", thr_range, "T0:T1 search range in hours (default: fit domain)");
  thr_cmd->add_flag("--json", thr_json, "print {\"crossing\": t|null}");

  // lifetime
  double life_capacity = 0.0, life_current = 0.0, life_exponent = 1.0;
  bool life_json = false;
  auto* life_cmd = app.add_subcommand("lifetime", "Peukert lifetime T = C / I^n");
  life_cmd->add_option("--capacity", life_capacity, "capacity in mAh")->required();
  life_cmd->add_option("--current", life_current, "load current in mA")->required();
  life_cmd->add_option("--exponent", life_exponent, "Peukert exponent n")->capture_default_str();
  life_cmd->add_flag("--json", life_json, "print {\"lifetime_h\": t}");

  // power
  detail::CurveSource pow_src;
  std::optional<double> pow_load_kohm, pow_volts;
  std::string pow_grid, pow_loads, pow_out, pow_format = "csv";
  auto* pow_cmd = app.add_subcommand("power", "load power over time or across loads");
  pow_src.attach(pow_cmd);
  auto* load_opt = pow_cmd->add_option("--load-kohm", pow_load_kohm, "load in kilo-ohms");
  pow_cmd->add_option("--grid", pow_grid, "T0:T1:STEP in hours");
  auto* volts_opt = pow_cmd->add_option("--volts", pow_volts, "fixed voltage for a load sweep");
  pow_cmd->add_option("--loads-kohm", pow_loads, "R1,R2,... or R0:R1:STEP in kilo-ohms");
  load_opt->excludes(volts_opt);
  pow_cmd->add_option("--out", pow_out, "series destination (default stdout)");
  pow_cmd->add_option("--format", pow_format, "csv or json")->capture_default_str();

  // simulate
  std::string sim_config, sim_out, sim_format = "csv";
  auto* sim_cmd = app.add_subcommand("simulate", "run a battery drain simulation");
  sim_cmd->add_option("--config", sim_config, "JSON config (schema 1)")->required();
  sim_cmd->add_option("--out", sim_out, "trace destination (default: summary only)");
  sim_cmd->add_option("--format", sim_format, "csv or json")->capture_default_str();

  std::vector<std::string> argv_storage{"nodelife"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      const auto samples = io::read_discharge_csv(fit_input);
      const auto curve = fit(samples, fit_degree);
      detail::with_output(fit_out, out, [&](std::ostream& os) { io::write_curve(curve, os); });
      out << "rmse: " << io::format_double(*curve.rmse) << '\n';
    } else if (eval_cmd->parsed()) {
      const auto format = io::parse_format(eval_format);
      const auto curve = eval_src.load();
      if (eval_at) {
        const auto reading = evaluate(curve, *eval_at);
        if (reading.extrapolated) {
          err << "warning: t = " << io::format_double(*eval_at) << " h is outside the fit domain ["
              << io::format_double(curve.t_min) << ", " << io::format_double(curve.t_max) << "]\n";
        }
        out << io::format_double(reading.volts) << '\n';
      } else if (!eval_grid.empty()) {
        std::vector<SeriesPoint> points;
        for (double t : detail::parse_grid(eval_grid)) points.push_back({t, curve(t)});
        detail::with_output(eval_out, out, [&](std::ostream& os) {
          io::emit_series(points, "t_hours", "v_volts", format, os);
        });
      } else {
        throw UsageError("eval needs --at or --grid");
      }
    } else if (thr_cmd->parsed()) {
      const auto curve = thr_src.load();
      double lo = curve.t_min, hi = curve.t_max;
      if (!thr_range.empty()) {
        const auto r = detail::parse_numbers(thr_range, ':', 2, "range (expected T0:T1)");
        lo = r[0];
        hi = r[1];
      }
      if (!(lo < hi)) throw UsageError("threshold range needs T0 < T1");
      const auto crossing = time_to_voltage(curve, thr_voltage, lo, hi);
      if (thr_json) {
        out << "{\"crossing\":" << (crossing ? io::format_double(*crossing) : "null") << "}\n";
      } else {
        out << (crossing ? detail::fixed(*crossing, 3) : "no crossing") << '\n';
      }
    } else if (life_cmd->parsed()) {
      const double hours = peukert_lifetime(life_capacity, life_current, life_exponent);
      if (life_exponent > kPeukertTypicalMax) {
        err << "warning: Peukert exponent " << io::format_double(life_exponent)
            << " is above the usual 1..1.3 range\n";
      }
      if (life_json) {
        out << "{\"lifetime_h\":" << io::format_double(hours) << "}\n";
      } else {
        out << detail::fixed(hours, 1) << '\n';
      }
    } else if (pow_cmd->parsed()) {
      const auto format = io::parse_format(pow_format);
      if (pow_volts) {
        if (pow_loads.empty()) throw UsageError("power --volts needs --loads-kohm");
        std::vector<double> kohms;
        if (pow_loads.find(':') != std::string::npos) {
          const auto g = detail::parse_numbers(pow_loads, ':', 3, "load range (R0:R1:STEP)");
          kohms = make_grid(g[0], g[1], g[2]);
        } else {
          kohms = detail::parse_numbers(pow_loads, ',', 0, "load list");
        }
        std::vector<double> ohms;
        for (double k : kohms) ohms.push_back(LoadProfile::from_kiloohms(k).ohms());
        std::vector<SeriesPoint> points;
        for (const auto& lp : load_sweep(*pow_volts, ohms)) {
          points.push_back({lp.ohms / kOhmsPerKiloohm, lp.p_mw});
        }
        detail::with_output(pow_out, out, [&](std::ostream& os) {
          io::emit_series(points, "r_kohm", "p_mw", format, os);
        });
      } else if (pow_load_kohm) {
        if (pow_grid.empty()) throw UsageError("power --load-kohm needs --grid");
        const auto curve = pow_src.load();
        const auto grid = detail::parse_grid(pow_grid);
        const auto series =
            power_curve(curve, LoadProfile::from_kiloohms(*pow_load_kohm).ohms(), grid);
        detail::with_output(pow_out, out, [&](std::ostream& os) {
          io::emit_series(series.points, "t_hours", "p_mw", format, os);
        });
      } else {
        throw UsageError("power needs --load-kohm with a curve, or --volts with --loads-kohm");
      }
    } else if (sim_cmd->parsed()) {
      const auto format = io::parse_format(sim_format);
      const auto config = io::read_config(sim_config);
      if (config.battery.exponent_atypical()) {
        err << "warning: Peukert exponent above the usual 1..1.3 range\n";
      }
      const auto trace = simulate(config);
      if (!sim_out.empty()) {
        detail::with_output(sim_out, out,
                            [&](std::ostream& os) { io::emit_trace(trace, format, os); });
      }
      if (trace.diagnostics.rate_factor_clamped) {
        err << "warning: rate factor clamped to 1 for sub-1 mA currents\n";
      }
      if (trace.diagnostics.voltage_extrapolated) {
        err << "warning: voltage curve evaluated outside its fit domain\n";
      }
      const auto life = lifetime(trace);
      out << "lifetime_h: " << io::format_double(life.hours) << (life.censored ? " (censored)" : "")
          << '\n'
          << "termination: " << termination_name(trace.reason) << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const RankDeficient& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    // InputError, IoError, DomainError, InsufficientSamples
    err << "error: " << e.what() << '\n';
    return kInputData;
  }
  return kOk;
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nodelife::cli
