#pragma once

#include <span>
#include <vector>

#include "mtlen/engine.hpp"

namespace mtlen {

struct PooledDistributions {
  std::vector<double> plus_growth_speeds;     // um/min, one per completed segment
  std::vector<double> plus_growth_durations;  // min
  std::vector<double> lengths;                // um, strictly positive, at the recording stride
  std::vector<double> plus_step_speeds;       // um/min, per-step effective speeds (diagnostic)
  double burn_in = 60.0;
};

/// Pools segment statistics and positive lengths from all traces after `burn_in`
/// minutes. Throws Error(EmptyPool) when no trace extends past the burn-in.
PooledDistributions pool_distributions(std::span<const SimulationTrace> traces,
                                       double burn_in = 60.0);

struct AllocationSeries {
  std::vector<double> t, F, U, M;
};

AllocationSeries allocation_series(const SimulationTrace& trace);

struct Band {
  std::vector<double> t;
  std::vector<double> mean, q25, q75;
};

/// Quantile with linear interpolation between order statistics (sorts a copy).
double quantile(std::span<const double> values, double q);

double mean(std::span<const double> values);

/// Pointwise mean and quartiles over aligned series. Requires at least two series.
Band ensemble_band(std::span<const double> t, std::span<const std::vector<double>> series);

/// One series per MT per trace: that MT's length at each recorded frame.
std::vector<std::vector<double>> length_series(std::span<const SimulationTrace> traces);

/// Per-trace mean MT length at each recorded frame.
std::vector<double> mean_length_series(const SimulationTrace& trace);

struct MinusEndTracks {
  std::vector<double> t;
  std::vector<std::vector<double>> tracks;  // x_minus(t) - x_minus(0), one per MT per trace
  Band band;
};

MinusEndTracks minus_end_tracks(std::span<const SimulationTrace> traces);

struct TurnoverCurve {
  double t_pc = 120.0;
  Interval window;
  std::vector<double> t_since;  // min since photoconversion
  std::vector<double> values;   // relative fluorescence
};

struct PhotoconversionSettings {
  double t_pc = 120.0;      // min
  double width = 10.0;      // um
  double scan_step = 0.5;   // um
};

/// Window with maximal polymer content among placements lo + k * scan_step inside
/// the occupied extent; ties go to the smallest coordinate.
Interval best_window(std::span<const MicrotubuleState> mts, double width, double scan_step);

/// Runs a simulation to t_pc, tags, continues to the horizon and returns the normalized
/// tagged-polymer curve. Throws Error(ZeroSignal) if nothing is polymerized at t_pc.
TurnoverCurve photoconvert(Simulation& sim, const PhotoconversionSettings& settings);

/// Turnover curve from a trace already carrying a tagged column.
TurnoverCurve turnover_from_trace(const SimulationTrace& trace, Interval window);

struct Histogram {
  std::vector<double> left, right;
  std::vector<std::size_t> count;
};

/// Fixed-width bins starting at `origin`, covering all finite values.
Histogram histogram(std::span<const double> values, double bin_width, double origin = 0.0);

}  // namespace mtlen
