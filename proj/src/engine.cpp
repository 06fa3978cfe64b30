#include "mtlen/engine.hpp"

#include <algorithm>
#include <cmath>

#include "mtlen/errors.hpp"

namespace mtlen {
namespace {

constexpr End kEnds[] = {End::Plus, End::Minus};

void clip_tags(MicrotubuleState& mt) {
  auto& tags = mt.tagged;
  for (auto& iv : tags) {
    iv.lo = std::max(iv.lo, mt.x_minus);
    iv.hi = std::min(iv.hi, mt.x_plus);
  }
  std::erase_if(tags, [](const Interval& iv) { return !(iv.hi > iv.lo); });
}

}  // namespace

double MicrotubuleState::tagged_length() const {
  double total = 0.0;
  for (const auto& iv : tagged) total += iv.length();
  return total;
}

double draw_exponential(Rng& rng, double rate) {
  // u in (0, 1]
  const double u = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
  return -std::log(u) / rate;
}

PhaseTimes draw_phase_times(const ModelParams& p, End end, double L_prev, Rng& rng) {
  PhaseTimes t;
  t.t_g = draw_exponential(rng, catastrophe_rate(p.catastrophe(), end, L_prev));
  t.t_s = draw_exponential(rng, p.lambda_sg(end));
  return t;
}

PhaseSplit resolve_step_phases(EndPhase entry, double t_g, double t_s, double dt) {
  PhaseSplit s;
  s.entry = entry;
  if (entry == EndPhase::Growth) {
    if (t_g >= dt) {
      s.growth_before = dt;
      s.exit = EndPhase::Growth;
    } else if (t_g + t_s >= dt) {
      s.growth_before = t_g;
      s.shrink = dt - t_g;
      s.exit = EndPhase::Shrinking;
    } else {
      // grow t_g, shrink t_s, grow for the rest of the step
      s.growth_before = t_g;
      s.shrink = t_s;
      s.growth_after = dt - t_g - t_s;
      s.exit = EndPhase::Growth;
    }
  } else {
    if (t_s >= dt) {
      s.shrink = dt;
      s.exit = EndPhase::Shrinking;
    } else {
      // one shrink per step: the remainder is growth whatever t_g is
      s.shrink = t_s;
      s.growth_after = dt - t_s;
      s.exit = EndPhase::Growth;
    }
  }
  return s;
}

double apply_shrink(std::span<MicrotubuleState> mts, std::span<StepOutcome> outcomes,
                    const ModelParams& p) {
  double released = 0.0;
  for (std::size_t i = 0; i < mts.size(); ++i) {
    auto& mt = mts[i];
    auto& out = outcomes[i];
    const double r_plus = p.v_s_plus * out.plus.split.shrink;
    const double r_minus = p.v_s_minus * out.minus.split.shrink;
    out.plus.shrink_requested = r_plus;
    out.minus.shrink_requested = r_minus;
    const double total = r_plus + r_minus;
    if (total <= 0.0) continue;

    const double length = mt.length();
    if (total < length) {
      mt.x_plus -= r_plus;
      mt.x_minus += r_minus;
      out.plus.shrink_realized = r_plus;
      out.minus.shrink_realized = r_minus;
      released += total;
      clip_tags(mt);
      continue;
    }

    const double a_plus = length * (r_plus / total);
    const double a_minus = length - a_plus;
    const double meet = mt.x_plus - a_plus;
    out.plus.shrink_realized = a_plus;
    out.minus.shrink_realized = a_minus;
    out.reseeded = true;
    out.meeting_point = meet;
    released += length;
    mt.x_plus = meet;
    mt.x_minus = meet;
    mt.tagged.clear();
  }
  return released;
}

void reseed(MicrotubuleState& mt, double position) {
  mt.x_plus = position;
  mt.x_minus = position;
  mt.phase_plus = EndPhase::Growth;
  mt.phase_minus = EndPhase::Growth;
  mt.tagged.clear();
}

double replenish(TubulinLedger& ledger, double dt, double tau_tub) {
  const double moved = ledger.U * -std::expm1(-dt / tau_tub);
  ledger.U -= moved;
  ledger.F += moved;
  return moved;
}

double apply_growth(std::span<MicrotubuleState> mts, std::span<StepOutcome> outcomes,
                    TubulinLedger& ledger, const ModelParams& p) {
  const double F = ledger.F;
  const double mm = F > 0.0 ? F / (p.F_half + F) : 0.0;
  double demand = 0.0;
  for (auto& out : outcomes) {
    for (End e : kEnds) {
      auto& eo = out.end(e);
      eo.growth_desired = mm * p.v_g(e) * eo.split.growth_time();
      demand += eo.growth_desired;
    }
  }
  if (demand <= 0.0) return 0.0;

  const bool rationed = demand > F;
  const double share = rationed ? F / demand : 1.0;
  double granted = 0.0;
  for (std::size_t i = 0; i < mts.size(); ++i) {
    auto& out = outcomes[i];
    out.plus.growth_realized = out.plus.growth_desired * share;
    out.minus.growth_realized = out.minus.growth_desired * share;
    mts[i].x_plus += out.plus.growth_realized;
    mts[i].x_minus -= out.minus.growth_realized;
    granted += out.plus.growth_realized + out.minus.growth_realized;
  }
  ledger.F = rationed ? 0.0 : std::max(0.0, F - granted);
  return granted;
}

double Trace::polymer(std::size_t frame) const {
  double m = 0.0;
  for (int i = 0; i < n_mt; ++i) m += length(frame, i);
  return m;
}

double Trace::mean_length(std::size_t frame) const { return polymer(frame) / n_mt; }

std::vector<MicrotubuleState> initial_microtubules(int n, double spacing, Rng& rng) {
  std::vector<MicrotubuleState> mts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& mt = mts[static_cast<std::size_t>(i)];
    mt.x_minus = mt.x_plus = spacing * i;
    mt.phase_plus = (rng() >> 63) ? EndPhase::Growth : EndPhase::Shrinking;
    mt.phase_minus = (rng() >> 63) ? EndPhase::Growth : EndPhase::Shrinking;
  }
  return mts;
}

Simulation::Simulation(const ModelParams& params, std::uint64_t seed, EngineOptions options)
    : params_(params), options_(options), rng_(seed) {
  params_.validate();
  if (!(options_.stride_seconds > 0.0))
    throw Error(ErrorKind::InvalidArgument, "stride must be positive");

  dt_ = params_.dt_minutes();
  stride_steps_ = static_cast<std::uint64_t>(
      std::max<long long>(1, std::llround(options_.stride_seconds / params_.prescribed.dt_seconds)));

  mts_ = initial_microtubules(params_.prescribed.N, options_.initial_spacing, rng_);
  ledger_.F = params_.prescribed.T_tot;
  ledger_.U = 0.0;
  outcomes_.resize(mts_.size());
  seg_plus_.resize(mts_.size());
  seg_minus_.resize(mts_.size());
  for (std::size_t i = 0; i < mts_.size(); ++i) {
    seg_plus_[i].active = mts_[i].phase_plus == EndPhase::Growth;
    seg_minus_[i].active = mts_[i].phase_minus == EndPhase::Growth;
  }

  out_.seed = seed;
  out_.params = params_;
  out_.stride_minutes = static_cast<double>(stride_steps_) * dt_;
  out_.trace.n_mt = params_.prescribed.N;
  record_frame();
}

double Simulation::time() const { return static_cast<double>(steps_) * dt_; }

double Simulation::polymer() const {
  double m = 0.0;
  for (const auto& mt : mts_) m += mt.length();
  return m;
}

double Simulation::tagged_total() const {
  double total = 0.0;
  for (const auto& mt : mts_) total += mt.tagged_length();
  return total;
}

double Simulation::conservation_error() const {
  const double T = params_.prescribed.T_tot;
  return std::abs(ledger_.F + ledger_.U + polymer() - T) / T;
}

const std::vector<StepOutcome>& Simulation::step() {
  const double t0 = time();
  for (std::size_t i = 0; i < mts_.size(); ++i) {
    auto& mt = mts_[i];
    auto& out = outcomes_[i];
    out = StepOutcome{};
    const double L_prev = mt.length();
    for (End e : kEnds) {
      const PhaseTimes pt = draw_phase_times(params_, e, L_prev, rng_);
      out.end(e).split = resolve_step_phases(mt.phase(e), pt.t_g, pt.t_s, dt_);
      mt.phase(e) = out.end(e).split.exit;
    }
  }

  ledger_.U += apply_shrink(mts_, outcomes_, params_);
  for (std::size_t i = 0; i < mts_.size(); ++i) {
    if (outcomes_[i].reseeded) {
      reseed(mts_[i], outcomes_[i].meeting_point);
      ++out_.reseeds;
    }
  }
  replenish(ledger_, dt_, params_.prescribed.tau_tub);
  apply_growth(mts_, outcomes_, ledger_, params_);

  ++steps_;
  track_segments(t0);

  out_.steps = steps_;
  out_.max_conservation_error = std::max(out_.max_conservation_error, conservation_error());
  if (steps_ % stride_steps_ == 0) record_frame();
  return outcomes_;
}

void Simulation::track_segments(double t0) {
  for (std::size_t i = 0; i < mts_.size(); ++i) {
    const auto& out = outcomes_[i];
    for (End e : kEnds) {
      auto& tr = e == End::Plus ? seg_plus_[i] : seg_minus_[i];
      const auto& eo = out.end(e);
      const auto& s = eo.split;
      const double gt = s.growth_time();
      const double grown_before = gt > 0.0 ? eo.growth_realized * (s.growth_before / gt) : 0.0;
      const double grown_after = gt > 0.0 ? eo.growth_realized - grown_before : 0.0;

      if (s.entry == EndPhase::Growth) {
        if (!tr.active) tr = SegmentTracker{true, t0, 0.0, 0.0};
        tr.duration += s.growth_before;
        tr.length += grown_before;
        if (s.shrink > 0.0) {
          // catastrophe: the segment is complete
          if (tr.duration > 0.0) out_.segments.push_back({e, tr.t_start, tr.duration, tr.length});
          tr.active = false;
        } else if (out.reseeded) {
          // the MT vanished under this end while it was still growing
          tr.active = false;
        }
      }
      if (s.growth_after > 0.0) {
        tr = SegmentTracker{true, t0 + s.growth_before + s.shrink, s.growth_after, grown_after};
      }
      if (mts_[i].phase(e) == EndPhase::Growth && !tr.active) {
        tr = SegmentTracker{true, t0 + dt_, 0.0, 0.0};
      }
      if (mts_[i].phase(e) == EndPhase::Shrinking) tr.active = false;

      if (e == End::Plus && options_.record_step_speeds && gt > 0.0 && eo.growth_realized > 0.0) {
        out_.step_speeds_plus.push_back({t0, eo.growth_realized / gt});
      }
    }
  }
}

void Simulation::run_until(double t_end) {
  const auto target = static_cast<std::uint64_t>(std::ceil(t_end / dt_ - 1e-9));
  while (steps_ < target) step();
}

double Simulation::tag_window(Interval window) {
  for (auto& mt : mts_) {
    const double lo = std::max(window.lo, mt.x_minus);
    const double hi = std::min(window.hi, mt.x_plus);
    if (hi > lo) {
      mt.tagged.push_back({lo, hi});
      std::sort(mt.tagged.begin(), mt.tagged.end(),
                [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
      // merge overlaps from repeated tagging
      std::vector<Interval> merged;
      for (const auto& iv : mt.tagged) {
        if (!merged.empty() && iv.lo <= merged.back().hi) {
          merged.back().hi = std::max(merged.back().hi, iv.hi);
        } else {
          merged.push_back(iv);
        }
      }
      mt.tagged = std::move(merged);
    }
  }
  out_.photoconversion_time = time();
  const double total = tagged_total();
  auto& tr = out_.trace;
  if (!tr.t.empty() && tr.t.back() == time()) tr.tagged.back() = total;
  return total;
}

void Simulation::record_frame() {
  auto& tr = out_.trace;
  tr.t.push_back(time());
  tr.F.push_back(ledger_.F);
  tr.U.push_back(ledger_.U);
  tr.tagged.push_back(tagged_total());
  for (const auto& mt : mts_) {
    tr.x_minus.push_back(mt.x_minus);
    tr.x_plus.push_back(mt.x_plus);
    tr.phase_plus.push_back(mt.phase_plus);
    tr.phase_minus.push_back(mt.phase_minus);
  }
}

}  // namespace mtlen
