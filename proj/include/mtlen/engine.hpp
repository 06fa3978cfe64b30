#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mtlen/params.hpp"

namespace mtlen {

enum class EndPhase : std::uint8_t { Growth = 0, Shrinking = 1 };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi > lo ? hi - lo : 0.0; }
};

struct MicrotubuleState {
  double x_plus = 0.0;
  double x_minus = 0.0;
  EndPhase phase_plus = EndPhase::Growth;
  EndPhase phase_minus = EndPhase::Growth;
  std::vector<Interval> tagged;  // disjoint, ascending, inside [x_minus, x_plus]

  double length() const { return x_plus - x_minus; }
  EndPhase& phase(End end) { return end == End::Plus ? phase_plus : phase_minus; }
  EndPhase phase(End end) const { return end == End::Plus ? phase_plus : phase_minus; }
  double tagged_length() const;
};

/// Free and unavailable tubulin. Polymerized tubulin M is the summed MT length.
struct TubulinLedger {
  double F = 0.0;
  double U = 0.0;
};

using Rng = std::mt19937_64;

/// Exponential variate with the given rate (1/time), from a 53-bit uniform.
double draw_exponential(Rng& rng, double rate);

struct PhaseTimes {
  double t_g = 0.0;
  double t_s = 0.0;
};

/// t_g ~ Exp(catastrophe rate at L_prev), t_s ~ Exp(lambda_sg(end)); times in minutes.
PhaseTimes draw_phase_times(const ModelParams& p, End end, double L_prev, Rng& rng);

/// How one end spends a step: growth, then at most one shrink, then growth again.
struct PhaseSplit {
  EndPhase entry = EndPhase::Growth;
  double growth_before = 0.0;
  double shrink = 0.0;
  double growth_after = 0.0;
  EndPhase exit = EndPhase::Growth;

  double growth_time() const { return growth_before + growth_after; }
  double shrink_time() const { return shrink; }
};

/// Case logic of a single step with the one-shrink-per-step rule.
PhaseSplit resolve_step_phases(EndPhase entry, double t_g, double t_s, double dt);

struct EndOutcome {
  PhaseSplit split;
  double shrink_requested = 0.0;  // um
  double shrink_realized = 0.0;   // um
  double growth_desired = 0.0;    // um
  double growth_realized = 0.0;   // um
};

struct StepOutcome {
  EndOutcome plus;
  EndOutcome minus;
  bool reseeded = false;
  double meeting_point = 0.0;  // valid when reseeded

  EndOutcome& end(End e) { return e == End::Plus ? plus : minus; }
  const EndOutcome& end(End e) const { return e == End::Plus ? plus : minus; }
};

/// Moves shrinking ends by v_s * shrink_time, clipping so no MT goes below zero length
/// (the clip is shared in proportion to the two ends' requests). Sets `reseeded` and
/// `meeting_point` for MTs that vanish; clips tagged intervals. Returns the released
/// polymer, which the caller adds to U.
double apply_shrink(std::span<MicrotubuleState> mts, std::span<StepOutcome> outcomes,
                    const ModelParams& p);

/// Zero-length MT at `position`, both ends growing, no tags.
void reseed(MicrotubuleState& mt, double position);

/// First-order release: U * (1 - exp(-dt / tau_tub)) moves from U to F.
double replenish(TubulinLedger& ledger, double dt, double tau_tub);

/// Michaelis-Menten growth with proportional rationing when demand exceeds F.
/// Returns the total polymerized length.
double apply_growth(std::span<MicrotubuleState> mts, std::span<StepOutcome> outcomes,
                    TubulinLedger& ledger, const ModelParams& p);

struct GrowthSegment {
  End end = End::Plus;
  double t_start = 0.0;   // min
  double duration = 0.0;  // min
  double length = 0.0;    // um polymerized
  double speed() const { return duration > 0.0 ? length / duration : 0.0; }
};

struct StepSpeedSample {
  double t = 0.0;      // min, step start
  double speed = 0.0;  // um/min
};

/// Strided snapshots in frame-major columnar layout.
struct Trace {
  int n_mt = 0;
  std::vector<double> t;  // min
  std::vector<double> F, U, tagged;
  std::vector<double> x_minus, x_plus;  // n_frames * n_mt
  std::vector<EndPhase> phase_plus, phase_minus;

  std::size_t frames() const { return t.size(); }
  double length(std::size_t frame, int mt) const {
    const auto k = frame * static_cast<std::size_t>(n_mt) + static_cast<std::size_t>(mt);
    return x_plus[k] - x_minus[k];
  }
  double polymer(std::size_t frame) const;
  double mean_length(std::size_t frame) const;
};

struct SimulationTrace {
  std::uint64_t seed = 0;
  ModelParams params;
  double stride_minutes = 0.0;
  Trace trace;
  std::vector<GrowthSegment> segments;
  std::vector<StepSpeedSample> step_speeds_plus;  // only with record_step_speeds
  std::uint64_t steps = 0;
  std::uint64_t reseeds = 0;
  double max_conservation_error = 0.0;  // max |F + U + M - T_tot| / T_tot over all steps
  double photoconversion_time = -1.0;   // min; negative when no tagging happened
};

struct EngineOptions {
  double stride_seconds = 10.0;
  double initial_spacing = 10.0;  // um between initial MT positions
  bool record_step_speeds = false;
};

/// Sequential fixed-step simulator for N microtubules sharing one tubulin pool.
class Simulation {
 public:
  Simulation(const ModelParams& params, std::uint64_t seed, EngineOptions options = {});

  /// Advances one step of dt and returns per-MT outcomes for that step.
  const std::vector<StepOutcome>& step();

  /// Steps until time() >= t_end (minutes), recording frames on the stride.
  void run_until(double t_end);
  void run() { run_until(params_.prescribed.t_end); }

  /// Tags, per MT, [x_minus, x_plus] intersected with `window`. Tags only erode afterwards.
  /// Returns the tagged total.
  double tag_window(Interval window);

  const std::vector<MicrotubuleState>& microtubules() const { return mts_; }
  const TubulinLedger& ledger() const { return ledger_; }
  const ModelParams& params() const { return params_; }
  double time() const;  // min
  std::uint64_t step_index() const { return steps_; }
  double polymer() const;
  double tagged_total() const;
  double conservation_error() const;

  const SimulationTrace& trace() const { return out_; }
  SimulationTrace take_trace() { return std::move(out_); }

 private:
  struct SegmentTracker {
    bool active = false;
    double t_start = 0.0;
    double duration = 0.0;
    double length = 0.0;
  };

  void record_frame();
  void track_segments(double t0);

  ModelParams params_;
  EngineOptions options_;
  Rng rng_;
  std::vector<MicrotubuleState> mts_;
  TubulinLedger ledger_;
  std::vector<StepOutcome> outcomes_;
  std::vector<SegmentTracker> seg_plus_, seg_minus_;
  std::uint64_t steps_ = 0;
  std::uint64_t stride_steps_ = 1;
  double dt_ = 0.0;  // min
  SimulationTrace out_;
};

/// Positions of the N initial MTs.
std::vector<MicrotubuleState> initial_microtubules(int n, double spacing, Rng& rng);

}  // namespace mtlen
