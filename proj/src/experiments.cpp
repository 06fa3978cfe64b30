#include "mtlen/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "mtlen/config.hpp"
#include "mtlen/errors.hpp"
#include "mtlen/io.hpp"

namespace mtlen {
namespace {

std::vector<double> arithmetic_grid(double first, double last, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::llround((last - first) / step));
  for (long k = 0; k <= n; ++k) v.push_back(first + static_cast<double>(k) * step);
  return v;
}

void check_spec(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw Error(ErrorKind::InvalidArgument, "trial count must be at least 1");
  if (spec.gammas.empty()) throw Error(ErrorKind::InvalidArgument, "no gamma values given");
}

ModelParams calibrate_at(const ExperimentSpec& spec, double gamma) {
  PrescribedParams pre = spec.base;
  pre.gamma = gamma;
  return calibrate(spec.observed, pre);
}

// A single trial still gets a band; its quartiles collapse onto the value.
Band band_of(std::span<const double> t, std::span<const std::vector<double>> series) {
  if (series.size() >= 2) return ensemble_band(t, series);
  Band b;
  b.t.assign(t.begin(), t.end());
  if (series.size() == 1) b.mean = b.q25 = b.q75 = series.front();
  return b;
}

std::vector<std::uint64_t> seeds_for(const ExperimentSpec& spec) {
  std::vector<std::uint64_t> s;
  for (int k = 0; k < spec.trials; ++k) s.push_back(spec.base_seed + static_cast<std::uint64_t>(k));
  return s;
}

nlohmann::json params_json(const ModelParams& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : to_key_values(p)) j[key] = value;
  return j;
}

nlohmann::json manifest_base(const ExperimentSpec& spec) {
  nlohmann::json m;
  m["experiment"] = to_string(spec.kind);
  m["trials"] = spec.trials;
  m["base_seed"] = spec.base_seed;
  m["burn_in_min"] = spec.burn_in;
  m["stride_seconds"] = spec.engine.stride_seconds;
  m["initial_spacing_um"] = spec.engine.initial_spacing;
  m["files"] = nlohmann::json::array();
  return m;
}

void write_manifest(const std::filesystem::path& dir, const nlohmann::json& m) {
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for manifest.json");
}

std::string tag(const char* prefix, double value) { return std::string(prefix) + format_double(value); }

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Dashboard: return "dashboard";
    case ExperimentKind::Titration: return "titration";
    case ExperimentKind::SteadySweep: return "steady_sweep";
    case ExperimentKind::TimestepTitration: return "timestep_titration";
  }
  return "unknown";
}

ExperimentSpec default_dashboard_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::Dashboard;
  return s;
}

ExperimentSpec default_titration_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::Titration;
  s.ttot_values = arithmetic_grid(700.0, 4000.0, 100.0);
  return s;
}

ExperimentSpec default_steady_sweep_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::SteadySweep;
  s.ttot_values = arithmetic_grid(750.0, 4000.0, 50.0);
  return s;
}

ExperimentSpec default_timestep_spec() {
  ExperimentSpec s;
  s.kind = ExperimentKind::TimestepTitration;
  s.gammas = {0.0};
  s.dt_values = {0.25, 0.5, 1.0, 2.0, 5.0};
  s.trials = 1;
  return s;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SimulationTrace> run_trials(const ModelParams& p, int trials, std::uint64_t base_seed,
                                        const EngineOptions& engine, int jobs) {
  std::vector<SimulationTrace> out(static_cast<std::size_t>(std::max(0, trials)));
  parallel_for(out.size(), jobs, [&](std::size_t k) {
    Simulation sim(p, base_seed + k, engine);
    sim.run();
    out[k] = sim.take_trace();
  });
  return out;
}

DashboardBundle run_dashboard(const ExperimentSpec& spec) {
  check_spec(spec);
  DashboardBundle bundle;
  for (double gamma : spec.gammas) {
    DashboardPanel panel;
    panel.gamma = gamma;
    panel.params = calibrate_at(spec, gamma);
    panel.seeds = seeds_for(spec);
    const auto traces = run_trials(panel.params, spec.trials, spec.base_seed, spec.engine, spec.jobs);

    panel.pooled = pool_distributions(traces, spec.burn_in);
    panel.speed_hist = histogram(panel.pooled.plus_growth_speeds, 0.5);
    panel.duration_hist = histogram(panel.pooled.plus_growth_durations, 0.5);
    panel.length_hist = histogram(panel.pooled.lengths, 1.0);

    const auto& t = traces.front().trace.t;
    std::vector<std::vector<double>> F, U, M;
    for (const auto& tr : traces) {
      auto a = allocation_series(tr);
      F.push_back(std::move(a.F));
      U.push_back(std::move(a.U));
      M.push_back(std::move(a.M));
      panel.max_conservation_error = std::max(panel.max_conservation_error, tr.max_conservation_error);
    }
    panel.free_band = band_of(t, F);
    panel.unavailable_band = band_of(t, U);
    panel.polymer_band = band_of(t, M);
    panel.minus_end_band = band_of(t, minus_end_tracks(traces).tracks);
    panel.length_band = band_of(t, length_series(traces));

    panel.target_speed = spec.observed.v_g_bar_plus;
    panel.target_duration = spec.observed.tau_g_bar_plus;
    panel.target_length = spec.base.L_bar;
    if (!panel.pooled.plus_growth_speeds.empty()) panel.emergent_speed = mean(panel.pooled.plus_growth_speeds);
    if (!panel.pooled.plus_growth_durations.empty())
      panel.emergent_duration = mean(panel.pooled.plus_growth_durations);
    if (!panel.pooled.lengths.empty()) panel.emergent_length = mean(panel.pooled.lengths);
    bundle.panels.push_back(std::move(panel));
  }
  return bundle;
}

std::vector<const TitrationPoint*> TitrationBundle::curve(double gamma) const {
  std::vector<const TitrationPoint*> out;
  for (const auto& p : points)
    if (p.gamma == gamma) out.push_back(&p);
  return out;
}

TitrationBundle run_titration(const ExperimentSpec& spec) {
  check_spec(spec);
  TitrationBundle bundle;
  bundle.seeds = seeds_for(spec);
  for (double gamma : spec.gammas) bundle.calibrated.push_back(calibrate_at(spec, gamma));

  struct TrialResult {
    std::vector<double> lengths;  // all MTs after burn-in, zeros included
    std::vector<double> positive;
    TurnoverCurve turnover;
    double max_conservation_error = 0.0;
  };

  for (std::size_t g = 0; g < spec.gammas.size(); ++g) {
    for (double T : spec.ttot_values) {
      const ModelParams p = bundle.calibrated[g].with_total_tubulin(T);
      std::vector<TrialResult> results(static_cast<std::size_t>(spec.trials));
      parallel_for(results.size(), spec.jobs, [&](std::size_t k) {
        Simulation sim(p, bundle.seeds[k], spec.engine);
        auto& r = results[k];
        r.turnover = photoconvert(sim, spec.photoconversion);
        const auto& tr = sim.trace().trace;
        for (std::size_t f = 0; f < tr.frames(); ++f) {
          if (tr.t[f] < spec.burn_in) continue;
          for (int i = 0; i < tr.n_mt; ++i) {
            const double L = tr.length(f, i);
            r.lengths.push_back(L);
            if (L > 0.0) r.positive.push_back(L);
          }
        }
        r.max_conservation_error = sim.trace().max_conservation_error;
      });

      TitrationPoint pt;
      pt.gamma = spec.gammas[g];
      pt.T_tot = T;
      std::vector<double> all, positive;
      for (auto& r : results) {
        all.insert(all.end(), r.lengths.begin(), r.lengths.end());
        positive.insert(positive.end(), r.positive.begin(), r.positive.end());
        pt.max_conservation_error = std::max(pt.max_conservation_error, r.max_conservation_error);
      }
      if (all.empty()) throw Error(ErrorKind::EmptyPool, "titration horizon shorter than the burn-in");
      pt.mean_length = mean(all);
      pt.median_length = quantile(all, 0.5);
      pt.q25 = quantile(all, 0.25);
      pt.q75 = quantile(all, 0.75);
      pt.mean_positive_length = positive.empty() ? 0.0 : mean(positive);
      pt.ode_L_star = solve_steady_state(p).L_star;

      std::size_t frames = results.front().turnover.values.size();
      for (const auto& r : results) frames = std::min(frames, r.turnover.values.size());
      pt.turnover_t.assign(results.front().turnover.t_since.begin(),
                           results.front().turnover.t_since.begin() + static_cast<long>(frames));
      for (auto& r : results) {
        r.turnover.values.resize(frames);
        pt.turnover_trials.push_back(std::move(r.turnover.values));
      }
      const Band b = band_of(pt.turnover_t, pt.turnover_trials);
      pt.turnover_mean = b.mean;
      pt.turnover_q25 = b.q25;
      pt.turnover_q75 = b.q75;
      bundle.points.push_back(std::move(pt));
    }
  }
  return bundle;
}

SteadySweep run_steady_sweep(const ExperimentSpec& spec) {
  check_spec(spec);
  SteadySweep sweep;
  for (double gamma : spec.gammas) {
    sweep.calibrated.push_back(calibrate_at(spec, gamma));
    for (double T : spec.ttot_values) {
      sweep.rows.push_back({T, gamma, solve_steady_state(sweep.calibrated.back().with_total_tubulin(T))});
    }
  }
  return sweep;
}

double window_mean_length(const SimulationTrace& trace, double t_from) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f < trace.trace.frames(); ++f) {
    if (trace.trace.t[f] < t_from) continue;
    sum += trace.trace.mean_length(f);
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyPool, "no frames in the averaging window");
  return sum / static_cast<double>(n);
}

TimestepBundle run_timestep_titration(const ExperimentSpec& spec) {
  check_spec(spec);
  TimestepBundle bundle;
  bundle.params = calibrate_at(spec, spec.gammas.front());
  const auto seeds = seeds_for(spec);
  const std::size_t n_dt = spec.dt_values.size();
  const auto n_trials = static_cast<std::size_t>(spec.trials);

  // Frames are recorded on a stride that every step size divides, so runs share one time grid.
  EngineOptions engine = spec.engine;
  if (!spec.dt_values.empty()) {
    engine.stride_seconds =
        std::max(engine.stride_seconds, *std::max_element(spec.dt_values.begin(), spec.dt_values.end()));
  }

  std::vector<SimulationTrace> traces(n_dt * n_trials);
  parallel_for(traces.size(), spec.jobs, [&](std::size_t job) {
    ModelParams p = bundle.params;
    p.prescribed.dt_seconds = spec.dt_values[job / n_trials];
    Simulation sim(p, seeds[job % n_trials], engine);
    sim.run();
    traces[job] = sim.take_trace();
  });

  const double t_from = bundle.params.prescribed.t_end - 60.0;
  bundle.runs.resize(n_dt);
  for (std::size_t i = 0; i < n_dt; ++i) {
    auto& run = bundle.runs[i];
    run.dt_seconds = spec.dt_values[i];
    run.validated = run.dt_seconds <= 1.0;
    run.seeds = seeds;
    std::size_t frames = traces[i * n_trials].trace.frames();
    for (std::size_t k = 0; k < n_trials; ++k) frames = std::min(frames, traces[i * n_trials + k].trace.frames());
    run.t.assign(traces[i * n_trials].trace.t.begin(), traces[i * n_trials].trace.t.begin() + static_cast<long>(frames));
    run.mean_length.assign(frames, 0.0);
    for (std::size_t k = 0; k < n_trials; ++k) {
      const auto& tr = traces[i * n_trials + k];
      const auto series = mean_length_series(tr);
      for (std::size_t f = 0; f < frames; ++f) run.mean_length[f] += series[f] / static_cast<double>(n_trials);
      run.final_hour_trials.push_back(window_mean_length(tr, t_from));
      run.max_conservation_error = std::max(run.max_conservation_error, tr.max_conservation_error);
    }
    run.final_hour_mean = mean(run.final_hour_trials);
  }
  for (const auto& a : bundle.runs) {
    for (const auto& b : bundle.runs) {
      if (!a.validated || !b.validated) continue;
      const double scale = std::max(a.final_hour_mean, b.final_hour_mean);
      if (scale > 0.0) {
        bundle.validated_spread =
            std::max(bundle.validated_spread, std::abs(a.final_hour_mean - b.final_hour_mean) / scale);
      }
    }
  }
  return bundle;
}

void write_dashboard(const DashboardBundle& bundle, const ExperimentSpec& spec) {
  const auto& dir = spec.out_dir;
  ensure_directory(dir);
  auto m = manifest_base(spec);
  m["seeds"] = seeds_for(spec);
  m["panels"] = nlohmann::json::array();
  for (const auto& panel : bundle.panels) {
    const std::string g = tag("gamma_", panel.gamma);
    auto file = [&](const std::string& name) {
      m["files"].push_back(g + "_" + name);
      return dir / (g + "_" + name);
    };
    write_histogram(file("plus_growth_speed_hist.csv"), panel.speed_hist);
    write_histogram(file("plus_growth_duration_hist.csv"), panel.duration_hist);
    write_histogram(file("length_hist.csv"), panel.length_hist);
    write_band(file("free_tubulin_band.csv"), panel.free_band, "um");
    write_band(file("unavailable_tubulin_band.csv"), panel.unavailable_band, "um");
    write_band(file("polymer_band.csv"), panel.polymer_band, "um");
    write_band(file("minus_end_displacement_band.csv"), panel.minus_end_band, "um");
    write_band(file("length_band.csv"), panel.length_band, "um");

    nlohmann::json pj;
    pj["gamma"] = panel.gamma;
    pj["params"] = params_json(panel.params);
    pj["targets"] = {{"plus_growth_speed_um_per_min", panel.target_speed},
                     {"plus_growth_duration_min", panel.target_duration},
                     {"length_um", panel.target_length}};
    pj["emergent_means"] = {{"plus_growth_speed_um_per_min", panel.emergent_speed},
                            {"plus_growth_duration_min", panel.emergent_duration},
                            {"length_um", panel.emergent_length}};
    pj["sample_counts"] = {{"plus_growth_speeds", panel.pooled.plus_growth_speeds.size()},
                           {"plus_growth_durations", panel.pooled.plus_growth_durations.size()},
                           {"lengths", panel.pooled.lengths.size()}};
    pj["max_conservation_error"] = panel.max_conservation_error;
    m["panels"].push_back(pj);
  }
  write_manifest(dir, m);
}

void write_titration(const TitrationBundle& bundle, const ExperimentSpec& spec) {
  const auto& dir = spec.out_dir;
  ensure_directory(dir);
  auto m = manifest_base(spec);
  m["seeds"] = bundle.seeds;
  m["photoconversion"] = {{"t_pc_min", spec.photoconversion.t_pc},
                          {"width_um", spec.photoconversion.width},
                          {"scan_step_um", spec.photoconversion.scan_step}};
  m["calibrated"] = nlohmann::json::array();
  for (const auto& p : bundle.calibrated) m["calibrated"].push_back(params_json(p));

  {
    TableWriter w(dir / "length_vs_ttot.csv",
                  {"gamma[1/(um min)]", "T_tot[um]", "mean_length[um]", "median_length[um]", "q25[um]",
                   "q75[um]", "mean_positive_length[um]", "ode_L_star[um]", "max_conservation_error[1]"});
    for (const auto& pt : bundle.points) {
      w.row({pt.gamma, pt.T_tot, pt.mean_length, pt.median_length, pt.q25, pt.q75,
             pt.mean_positive_length, pt.ode_L_star, pt.max_conservation_error});
    }
    m["files"].push_back("length_vs_ttot.csv");
  }
  for (const auto& pt : bundle.points) {
    const std::string name = tag("turnover_gamma_", pt.gamma) + tag("_ttot_", pt.T_tot) + ".csv";
    TableWriter w(dir / name, {"t_since_pc[min]", "mean[1]", "q25[1]", "q75[1]"});
    for (std::size_t i = 0; i < pt.turnover_t.size(); ++i) {
      w.row({pt.turnover_t[i], pt.turnover_mean[i], pt.turnover_q25[i], pt.turnover_q75[i]});
    }
    m["files"].push_back(name);
  }
  write_manifest(dir, m);
}

void write_steady_sweep(const SteadySweep& sweep, const ExperimentSpec& spec) {
  const auto& dir = spec.out_dir;
  ensure_directory(dir);
  auto m = manifest_base(spec);
  m["calibrated"] = nlohmann::json::array();
  for (const auto& p : sweep.calibrated) m["calibrated"].push_back(params_json(p));
  TableWriter w(dir / "steady_sweep.csv", {"T_tot[um]", "gamma[1/(um min)]", "L_star[um]", "g_plus_star[1]",
                                           "g_minus_star[1]", "residual[1]"});
  for (const auto& r : sweep.rows) {
    w.row({r.T_tot, r.gamma, r.state.L_star, r.state.g_plus_star, r.state.g_minus_star, r.state.residual});
  }
  m["files"].push_back("steady_sweep.csv");
  write_manifest(dir, m);
}

void write_timestep(const TimestepBundle& bundle, const ExperimentSpec& spec) {
  const auto& dir = spec.out_dir;
  ensure_directory(dir);
  auto m = manifest_base(spec);
  m["params"] = params_json(bundle.params);
  m["validated_spread"] = bundle.validated_spread;
  m["runs"] = nlohmann::json::array();
  for (const auto& run : bundle.runs) {
    const std::string name = tag("mean_length_dt_", run.dt_seconds) + ".csv";
    TableWriter w(dir / name, {"t[min]", "mean_length[um]"});
    for (std::size_t i = 0; i < run.t.size(); ++i) w.row({run.t[i], run.mean_length[i]});
    m["files"].push_back(name);
    m["runs"].push_back({{"dt_seconds", run.dt_seconds},
                         {"validated_regime", run.validated},
                         {"seeds", run.seeds},
                         {"final_hour_mean_length_per_trial_um", run.final_hour_trials},
                         {"final_hour_mean_length_um", run.final_hour_mean},
                         {"max_conservation_error", run.max_conservation_error},
                         {"file", name}});
  }
  write_manifest(dir, m);
}

}  // namespace mtlen
