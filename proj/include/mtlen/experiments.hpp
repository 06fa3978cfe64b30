#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mtlen/meanfield.hpp"
#include "mtlen/observables.hpp"

namespace mtlen {

enum class ExperimentKind { Dashboard, Titration, SteadySweep, TimestepTitration };

const char* to_string(ExperimentKind kind) noexcept;

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Dashboard;
  ObservedQuantities observed;
  PrescribedParams base;  // calibration point; gamma is taken from `gammas`
  std::vector<double> gammas{0.0, 0.005, 0.03};
  std::vector<double> ttot_values;  // titration / sweep levels
  std::vector<double> dt_values;    // timestep titration, seconds
  int trials = 10;
  std::uint64_t base_seed = 1;  // trial k uses base_seed + k
  int jobs = 1;
  double burn_in = 60.0;  // min
  EngineOptions engine;
  PhotoconversionSettings photoconversion;
  std::filesystem::path out_dir;  // empty: nothing is written
};

ExperimentSpec default_dashboard_spec();
ExperimentSpec default_titration_spec();    // T_tot = 700, 800, ..., 4000
ExperimentSpec default_steady_sweep_spec(); // T_tot = 750, 800, ..., 4000
ExperimentSpec default_timestep_spec();     // dt = 0.25, 0.5, 1, 2, 5 s, gamma = 0, one trial

/// Runs fn(0..n-1) on up to `jobs` threads. Results must be written by index.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Independent trials of one parameter set, seeds base_seed + k.
std::vector<SimulationTrace> run_trials(const ModelParams& p, int trials, std::uint64_t base_seed,
                                        const EngineOptions& engine, int jobs);

struct DashboardPanel {
  double gamma = 0.0;
  ModelParams params;
  std::vector<std::uint64_t> seeds;
  PooledDistributions pooled;
  Histogram speed_hist, duration_hist, length_hist;
  Band free_band, unavailable_band, polymer_band;
  Band minus_end_band;
  Band length_band;
  double target_speed = 0.0, target_duration = 0.0, target_length = 0.0;
  double emergent_speed = 0.0, emergent_duration = 0.0, emergent_length = 0.0;
  double max_conservation_error = 0.0;
};

struct DashboardBundle {
  std::vector<DashboardPanel> panels;
};

DashboardBundle run_dashboard(const ExperimentSpec& spec);

struct TitrationPoint {
  double gamma = 0.0;
  double T_tot = 0.0;
  double mean_length = 0.0;  // all MTs, zeros included, after burn-in
  double median_length = 0.0;
  double q25 = 0.0, q75 = 0.0;
  double mean_positive_length = 0.0;
  double ode_L_star = 0.0;
  std::vector<double> turnover_t;     // min since photoconversion
  std::vector<double> turnover_mean;  // mean relative fluorescence over trials
  std::vector<double> turnover_q25, turnover_q75;
  std::vector<std::vector<double>> turnover_trials;
  double max_conservation_error = 0.0;
};

struct TitrationBundle {
  std::vector<ModelParams> calibrated;  // one per gamma, at the base T_tot
  std::vector<TitrationPoint> points;   // gamma-major, then T_tot
  std::vector<std::uint64_t> seeds;

  std::vector<const TitrationPoint*> curve(double gamma) const;
};

TitrationBundle run_titration(const ExperimentSpec& spec);

struct SteadyRow {
  double T_tot = 0.0;
  double gamma = 0.0;
  SteadyState state;
};

struct SteadySweep {
  std::vector<ModelParams> calibrated;
  std::vector<SteadyRow> rows;
};

SteadySweep run_steady_sweep(const ExperimentSpec& spec);

struct TimestepRun {
  double dt_seconds = 0.0;
  bool validated = false;  // dt <= 1 s
  std::vector<std::uint64_t> seeds;
  std::vector<double> t;
  std::vector<double> mean_length;  // averaged over trials when there are several
  double final_hour_mean = 0.0;  // averaged over trials
  std::vector<double> final_hour_trials;
  double max_conservation_error = 0.0;
};

struct TimestepBundle {
  ModelParams params;
  std::vector<TimestepRun> runs;
  /// Largest pairwise relative difference of final-hour means among validated runs.
  double validated_spread = 0.0;
};

TimestepBundle run_timestep_titration(const ExperimentSpec& spec);

/// Mean over frames with t >= t_from of the per-frame mean length.
double window_mean_length(const SimulationTrace& trace, double t_from);

// Writers: data files plus manifest.json into spec.out_dir.
void write_dashboard(const DashboardBundle& bundle, const ExperimentSpec& spec);
void write_titration(const TitrationBundle& bundle, const ExperimentSpec& spec);
void write_steady_sweep(const SteadySweep& sweep, const ExperimentSpec& spec);
void write_timestep(const TimestepBundle& bundle, const ExperimentSpec& spec);

}  // namespace mtlen
