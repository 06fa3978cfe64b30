// Command-line front end: calibration, stochastic runs, mean-field steady states and
// the scripted experiments. Data go to --out; summaries to stdout; failures to stderr
// as one JSON record.

#include <cstdint>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtlen/config.hpp"
#include "mtlen/errors.hpp"
#include "mtlen/experiments.hpp"
#include "mtlen/io.hpp"

namespace fs = std::filesystem;
using namespace mtlen;

namespace {

enum ExitCode : int { kOk = 0, kOther = 1, kUsage = 2, kInfeasible = 3, kIo = 4 };

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  int trials = 1;
  int jobs = 1;
  std::string out;
  std::optional<double> gamma;
  std::optional<double> ttot;
  std::optional<double> dt_seconds;
  std::vector<std::string> overrides;

  // subcommand specific
  bool sweep = false;
  double t_pc = 120.0;
  double window = 10.0;
  double scan_step = 0.5;
  bool record_step_speeds = false;
};

void add_common(CLI::App* cmd, Options& o, bool with_trials_default_10) {
  cmd->add_option("--config", o.config, "flat key = value parameter file");
  cmd->add_option("--seed", o.seed, "base seed; trial k uses seed + k");
  cmd->add_option("--trials", o.trials,
                  with_trials_default_10 ? "independent trials (default 10)" : "independent trials")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--gamma", o.gamma, "length dependence of the catastrophe rate, 1/(um min)");
  cmd->add_option("--ttot", o.ttot, "operating total tubulin, um (innate parameters stay frozen)");
  cmd->add_option("--dt-seconds", o.dt_seconds, "stochastic time step, s");
  cmd->add_option("--set", o.overrides, "KEY=VALUE parameter override (repeatable)")
      ->allow_extra_args(false);
}

ParameterFile load_parameters(const Options& o) {
  if (!o.config.empty() && !fs::is_regular_file(o.config)) {
    throw Error(ErrorKind::Config, "config file not found: " + o.config);
  }
  ParameterFile file = o.config.empty() ? ParameterFile{} : parameter_file_from(read_key_values(o.config));
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::Config, "--set expects KEY=VALUE, got '" + kv + "'");
    }
    apply_override(file, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.gamma) apply_override(file, "gamma", format_double(*o.gamma));
  if (o.dt_seconds) apply_override(file, "dt_seconds", format_double(*o.dt_seconds));
  return file;
}

ModelParams operating_params(const Options& o) {
  ModelParams p = resolve(load_parameters(o));
  if (o.ttot) p = p.with_total_tubulin(*o.ttot);
  p.validate();
  return p;
}

fs::path out_dir(const Options& o, const char* fallback) {
  return o.out.empty() ? fs::path(fallback) : fs::path(o.out);
}

void print_kv(const std::string& key, double value) { std::cout << key << " = " << format_double(value) << '\n'; }

ExperimentSpec spec_from(const Options& o, ExperimentSpec spec, const char* fallback_dir) {
  const ParameterFile file = load_parameters(o);
  if (file.frozen) {
    throw Error(ErrorKind::Config, "experiments calibrate per gamma; give observed and prescribed inputs only");
  }
  spec.observed = file.observed;
  spec.base = file.prescribed;
  if (o.gamma) spec.gammas = {*o.gamma};
  spec.base_seed = o.seed;
  spec.jobs = o.jobs;
  spec.out_dir = out_dir(o, fallback_dir);
  return spec;
}

int cmd_calibrate(const Options& o) {
  const ModelParams p = operating_params(o);
  write_model_params(std::cout, p);
  std::cout << "# balance residual = " << format_double(calibration_residual(p).max_abs()) << '\n';
  std::cout << "# feasibility margin = " << format_double(p.feasibility_margin) << '\n';
  if (!o.out.empty()) {
    ensure_directory(o.out);
    write_model_params(fs::path(o.out) / "params.cfg", p);
  }
  return kOk;
}

int cmd_steady(const Options& o) {
  if (o.sweep) {
    auto spec = spec_from(o, default_steady_sweep_spec(), "mtlen_steady");
    const SteadySweep sweep = run_steady_sweep(spec);
    write_steady_sweep(sweep, spec);
    for (const auto& row : sweep.rows) {
      std::cout << format_double(row.gamma) << ' ' << format_double(row.T_tot) << ' '
                << format_double(row.state.L_star) << '\n';
    }
    return kOk;
  }
  const ModelParams p = operating_params(o);
  const SteadyState s = solve_steady_state(p);
  print_kv("T_tot", p.prescribed.T_tot);
  print_kv("gamma", p.prescribed.gamma);
  print_kv("L_star", s.L_star);
  print_kv("g_plus_star", s.g_plus_star);
  print_kv("g_minus_star", s.g_minus_star);
  print_kv("residual", s.residual);
  print_kv("H_intersection", H_intersection(p));
  return kOk;
}

int cmd_simulate(const Options& o) {
  const ModelParams p = operating_params(o);
  const fs::path dir = out_dir(o, "mtlen_simulate");
  ensure_directory(dir);
  EngineOptions engine;
  engine.record_step_speeds = o.record_step_speeds;
  const auto traces = run_trials(p, o.trials, o.seed, engine, o.jobs);

  nlohmann::json m;
  m["experiment"] = "simulate";
  m["seeds"] = nlohmann::json::array();
  m["files"] = nlohmann::json::array();
  m["params"] = nlohmann::json::object();
  for (const auto& [k, v] : to_key_values(p)) m["params"][k] = v;
  write_model_params(dir / "params.cfg", p);
  m["files"].push_back("params.cfg");

  double max_err = 0.0;
  for (const auto& tr : traces) {
    const std::string s = std::to_string(tr.seed);
    m["seeds"].push_back(tr.seed);
    write_trace(dir / ("trace_seed_" + s + ".csv"), tr);
    {
      const AllocationSeries a = allocation_series(tr);
      TableWriter w(dir / ("allocation_seed_" + s + ".csv"), {"t[min]", "F[um]", "U[um]", "M[um]"});
      for (std::size_t i = 0; i < a.t.size(); ++i) w.row({a.t[i], a.F[i], a.U[i], a.M[i]});
    }
    {
      TableWriter w(dir / ("segments_seed_" + s + ".csv"),
                    {"end", "t_start[min]", "duration[min]", "length[um]", "speed[um/min]"});
      for (const auto& seg : tr.segments) {
        w.raw_row({seg.end == End::Plus ? "plus" : "minus", format_double(seg.t_start),
                   format_double(seg.duration), format_double(seg.length), format_double(seg.speed())});
      }
    }
    m["files"].push_back("trace_seed_" + s + ".csv");
    m["files"].push_back("allocation_seed_" + s + ".csv");
    m["files"].push_back("segments_seed_" + s + ".csv");
    max_err = std::max(max_err, tr.max_conservation_error);
  }
  m["max_conservation_error"] = max_err;

  if (p.prescribed.t_end > 60.0) {
    const PooledDistributions pool = pool_distributions(traces, 60.0);
    write_histogram(dir / "plus_growth_speed_hist.csv", histogram(pool.plus_growth_speeds, 0.5));
    write_histogram(dir / "plus_growth_duration_hist.csv", histogram(pool.plus_growth_durations, 0.5));
    write_histogram(dir / "length_hist.csv", histogram(pool.lengths, 1.0));
    if (!pool.plus_step_speeds.empty()) {
      write_histogram(dir / "plus_step_speed_hist.csv", histogram(pool.plus_step_speeds, 0.5));
      m["files"].push_back("plus_step_speed_hist.csv");
    }
    for (const char* f : {"plus_growth_speed_hist.csv", "plus_growth_duration_hist.csv", "length_hist.csv"})
      m["files"].push_back(f);
    auto safe_mean = [](const std::vector<double>& v) { return v.empty() ? 0.0 : mean(v); };
    m["emergent_means"] = {{"plus_growth_speed_um_per_min", safe_mean(pool.plus_growth_speeds)},
                           {"plus_growth_duration_min", safe_mean(pool.plus_growth_durations)},
                           {"positive_length_um", safe_mean(pool.lengths)}};
    print_kv("mean_plus_growth_speed", safe_mean(pool.plus_growth_speeds));
    print_kv("mean_plus_growth_duration", safe_mean(pool.plus_growth_durations));
    print_kv("mean_positive_length", safe_mean(pool.lengths));
  }
  print_kv("max_conservation_error", max_err);

  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorKind::Io, "cannot write manifest in " + dir.string());
  out << m.dump(2) << '\n';
  return kOk;
}

int cmd_photoconvert(const Options& o) {
  const ModelParams p = operating_params(o);
  const fs::path dir = out_dir(o, "mtlen_photoconvert");
  ensure_directory(dir);
  const PhotoconversionSettings settings{o.t_pc, o.window, o.scan_step};

  std::vector<TurnoverCurve> curves(static_cast<std::size_t>(o.trials));
  parallel_for(curves.size(), o.jobs, [&](std::size_t k) {
    Simulation sim(p, o.seed + k);
    curves[k] = photoconvert(sim, settings);
  });

  nlohmann::json m;
  m["experiment"] = "photoconvert";
  m["params"] = nlohmann::json::object();
  for (const auto& [k, v] : to_key_values(p)) m["params"][k] = v;
  m["photoconversion"] = {{"t_pc_min", o.t_pc}, {"width_um", o.window}, {"scan_step_um", o.scan_step}};
  m["trials"] = nlohmann::json::array();
  m["files"] = nlohmann::json::array();
  std::vector<std::vector<double>> values;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const std::string name = "turnover_seed_" + std::to_string(o.seed + k) + ".csv";
    write_turnover(dir / name, curves[k].t_since, curves[k].values);
    m["files"].push_back(name);
    m["trials"].push_back({{"seed", o.seed + k},
                           {"window_um", {curves[k].window.lo, curves[k].window.hi}},
                           {"final_relative_fluorescence", curves[k].values.back()}});
    values.push_back(curves[k].values);
  }
  if (values.size() >= 2) {
    write_band(dir / "turnover_band.csv", ensemble_band(curves.front().t_since, values), "1");
    m["files"].push_back("turnover_band.csv");
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorKind::Io, "cannot write manifest in " + dir.string());
  out << m.dump(2) << '\n';
  for (const auto& c : curves) print_kv("final_relative_fluorescence", c.values.back());
  return kOk;
}

int cmd_dashboard(const Options& o) {
  auto spec = spec_from(o, default_dashboard_spec(), "mtlen_dashboard");
  spec.trials = o.trials;
  const DashboardBundle bundle = run_dashboard(spec);
  write_dashboard(bundle, spec);
  for (const auto& panel : bundle.panels) {
    std::cout << "gamma = " << format_double(panel.gamma)
              << "  speed = " << format_double(panel.emergent_speed)
              << "  duration = " << format_double(panel.emergent_duration)
              << "  length = " << format_double(panel.emergent_length) << '\n';
  }
  return kOk;
}

int cmd_titrate(const Options& o) {
  auto spec = spec_from(o, default_titration_spec(), "mtlen_titration");
  spec.trials = o.trials;
  spec.photoconversion = {o.t_pc, o.window, o.scan_step};
  const TitrationBundle bundle = run_titration(spec);
  write_titration(bundle, spec);
  for (const auto& pt : bundle.points) {
    std::cout << format_double(pt.gamma) << ' ' << format_double(pt.T_tot) << ' '
              << format_double(pt.mean_length) << ' ' << format_double(pt.q25) << ' '
              << format_double(pt.q75) << ' ' << format_double(pt.ode_L_star) << '\n';
  }
  return kOk;
}

int cmd_timestep(const Options& o) {
  auto spec = spec_from(o, default_timestep_spec(), "mtlen_timestep");
  if (!o.gamma) spec.gammas = {0.0};
  spec.trials = o.trials;
  const TimestepBundle bundle = run_timestep_titration(spec);
  write_timestep(bundle, spec);
  for (const auto& run : bundle.runs) {
    std::cout << "dt_seconds = " << format_double(run.dt_seconds)
              << "  final_hour_mean = " << format_double(run.final_hour_mean)
              << (run.validated ? "" : "  (outside validated regime)") << '\n';
  }
  print_kv("validated_spread", bundle.validated_spread);
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Config: return kUsage;
    case ErrorKind::Infeasible:
    case ErrorKind::NonPositiveFreePool: return kInfeasible;
    case ErrorKind::Io: return kIo;
    default: return kOther;
  }
}

int report(const std::string& kind, const std::string& message, int code) {
  nlohmann::json record{{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << record.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Length regulation of microtubules sharing a tubulin pool"};
  app.require_subcommand(1);
  Options o;

  auto* calibrate_cmd = app.add_subcommand("calibrate", "print the implied parameters");
  add_common(calibrate_cmd, o, false);
  auto* simulate_cmd = app.add_subcommand("simulate", "stochastic runs: traces and observables");
  add_common(simulate_cmd, o, false);
  simulate_cmd->add_flag("--step-speeds", o.record_step_speeds, "also record per-step plus-end speeds");
  auto* steady_cmd = app.add_subcommand("steady", "mean-field steady state");
  add_common(steady_cmd, o, false);
  steady_cmd->add_flag("--sweep", o.sweep, "sweep T_tot over 750..4000 um for each gamma");
  auto* dashboard_cmd = app.add_subcommand("dashboard", "target vs emergent distributions per gamma");
  add_common(dashboard_cmd, o, true);
  auto* titrate_cmd = app.add_subcommand("titrate", "tubulin titration with frozen innate parameters");
  add_common(titrate_cmd, o, true);
  auto* photo_cmd = app.add_subcommand("photoconvert", "tag a window and follow the turnover");
  add_common(photo_cmd, o, false);
  auto* timestep_cmd = app.add_subcommand("timestep", "mean length for several time steps");
  add_common(timestep_cmd, o, false);
  for (auto* cmd : {photo_cmd, titrate_cmd}) {
    cmd->add_option("--t-pc", o.t_pc, "photoconversion time, min");
    cmd->add_option("--window", o.window, "window width, um");
    cmd->add_option("--scan-step", o.scan_step, "window placement resolution, um");
  }
  dashboard_cmd->preparse_callback([&](std::size_t) { o.trials = 10; });
  titrate_cmd->preparse_callback([&](std::size_t) { o.trials = 10; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), kUsage);
  }

  try {
    if (*calibrate_cmd) return cmd_calibrate(o);
    if (*simulate_cmd) return cmd_simulate(o);
    if (*steady_cmd) return cmd_steady(o);
    if (*dashboard_cmd) return cmd_dashboard(o);
    if (*titrate_cmd) return cmd_titrate(o);
    if (*photo_cmd) return cmd_photoconvert(o);
    if (*timestep_cmd) return cmd_timestep(o);
  } catch (const Error& e) {
    return report(to_string(e.kind()), e.what(), exit_code_for(e.kind()));
  } catch (const std::exception& e) {
    return report("internal", e.what(), kOther);
  }
  return kOther;
}
