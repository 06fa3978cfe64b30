#include "mtlen/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtlen/errors.hpp"

namespace mtlen {

PooledDistributions pool_distributions(std::span<const SimulationTrace> traces, double burn_in) {
  PooledDistributions out;
  out.burn_in = burn_in;
  bool any_past_burn_in = false;
  for (const auto& tr : traces) {
    if (!tr.trace.t.empty() && tr.trace.t.back() > burn_in) any_past_burn_in = true;
    for (const auto& seg : tr.segments) {
      if (seg.end != End::Plus || seg.t_start < burn_in) continue;
      if (seg.duration > 0.0) out.plus_growth_durations.push_back(seg.duration);
      if (const double v = seg.speed(); v > 0.0) out.plus_growth_speeds.push_back(v);
    }
    for (std::size_t f = 0; f < tr.trace.frames(); ++f) {
      if (tr.trace.t[f] < burn_in) continue;
      for (int i = 0; i < tr.trace.n_mt; ++i) {
        if (const double L = tr.trace.length(f, i); L > 0.0) out.lengths.push_back(L);
      }
    }
    for (const auto& s : tr.step_speeds_plus) {
      if (s.t >= burn_in && s.speed > 0.0) out.plus_step_speeds.push_back(s.speed);
    }
  }
  if (!any_past_burn_in) {
    throw Error(ErrorKind::EmptyPool, "no trace extends past the burn-in");
  }
  return out;
}

AllocationSeries allocation_series(const SimulationTrace& trace) {
  const auto& tr = trace.trace;
  AllocationSeries a;
  a.t = tr.t;
  a.F = tr.F;
  a.U = tr.U;
  a.M.reserve(tr.frames());
  for (std::size_t f = 0; f < tr.frames(); ++f) a.M.push_back(tr.polymer(f));
  return a;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile level outside [0,1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

Band ensemble_band(std::span<const double> t, std::span<const std::vector<double>> series) {
  if (series.size() < 2) throw Error(ErrorKind::InvalidArgument, "ensemble band needs at least two series");
  for (const auto& s : series) {
    if (s.size() != t.size()) throw Error(ErrorKind::InvalidArgument, "ensemble band: misaligned series");
  }
  Band b;
  b.t.assign(t.begin(), t.end());
  std::vector<double> column(series.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t k = 0; k < series.size(); ++k) column[k] = series[k][i];
    b.mean.push_back(mean(column));
    b.q25.push_back(quantile(column, 0.25));
    b.q75.push_back(quantile(column, 0.75));
  }
  return b;
}

std::vector<std::vector<double>> length_series(std::span<const SimulationTrace> traces) {
  std::vector<std::vector<double>> out;
  for (const auto& tr : traces) {
    for (int i = 0; i < tr.trace.n_mt; ++i) {
      std::vector<double> s(tr.trace.frames());
      for (std::size_t f = 0; f < s.size(); ++f) s[f] = tr.trace.length(f, i);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<double> mean_length_series(const SimulationTrace& trace) {
  std::vector<double> out(trace.trace.frames());
  for (std::size_t f = 0; f < out.size(); ++f) out[f] = trace.trace.mean_length(f);
  return out;
}

MinusEndTracks minus_end_tracks(std::span<const SimulationTrace> traces) {
  MinusEndTracks m;
  if (traces.empty()) return m;
  std::size_t frames = traces.front().trace.frames();
  for (const auto& tr : traces) frames = std::min(frames, tr.trace.frames());
  m.t.assign(traces.front().trace.t.begin(), traces.front().trace.t.begin() + static_cast<long>(frames));
  for (const auto& tr : traces) {
    const auto n = static_cast<std::size_t>(tr.trace.n_mt);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> track(frames);
      const double origin = frames > 0 ? tr.trace.x_minus[i] : 0.0;
      for (std::size_t f = 0; f < frames; ++f) track[f] = tr.trace.x_minus[f * n + i] - origin;
      m.tracks.push_back(std::move(track));
    }
  }
  if (m.tracks.size() >= 2) m.band = ensemble_band(m.t, m.tracks);
  return m;
}

Interval best_window(std::span<const MicrotubuleState> mts, double width, double scan_step) {
  if (!(width > 0.0) || !(scan_step > 0.0))
    throw Error(ErrorKind::InvalidArgument, "window width and scan step must be positive");
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& mt : mts) {
    if (!(mt.length() > 0.0)) continue;
    lo = any ? std::min(lo, mt.x_minus) : mt.x_minus;
    hi = any ? std::max(hi, mt.x_plus) : mt.x_plus;
    any = true;
  }
  if (!any) return {0.0, width};

  auto content = [&](double a) {
    double sum = 0.0;
    for (const auto& mt : mts) sum += Interval{std::max(a, mt.x_minus), std::min(a + width, mt.x_plus)}.length();
    return sum;
  };
  Interval best{lo, lo + width};
  double best_content = content(lo);
  for (long k = 1;; ++k) {
    const double a = lo + static_cast<double>(k) * scan_step;
    if (a + width > hi) break;
    if (const double c = content(a); c > best_content) {
      best_content = c;
      best = {a, a + width};
    }
  }
  return best;
}

TurnoverCurve turnover_from_trace(const SimulationTrace& trace, Interval window) {
  const auto& tr = trace.trace;
  const double t_pc = trace.photoconversion_time;
  if (t_pc < 0.0) throw Error(ErrorKind::InvalidArgument, "trace has no photoconversion event");
  const double eps = 1e-9 * std::max(1.0, t_pc);
  const auto first = std::find_if(tr.t.begin(), tr.t.end(), [&](double t) { return t >= t_pc - eps; });
  if (first == tr.t.end()) throw Error(ErrorKind::InvalidArgument, "photoconversion after the last frame");
  const auto i0 = static_cast<std::size_t>(first - tr.t.begin());
  const double reference = tr.tagged[i0];
  if (!(reference > 0.0)) throw Error(ErrorKind::ZeroSignal, "no tagged polymer at photoconversion");

  TurnoverCurve c;
  c.t_pc = t_pc;
  c.window = window;
  for (std::size_t f = i0; f < tr.frames(); ++f) {
    c.t_since.push_back(tr.t[f] - t_pc);
    c.values.push_back(tr.tagged[f] / reference);
  }
  return c;
}

TurnoverCurve photoconvert(Simulation& sim, const PhotoconversionSettings& settings) {
  if (!(settings.t_pc < sim.params().prescribed.t_end))
    throw Error(ErrorKind::InvalidArgument, "photoconversion time must precede the horizon");
  sim.run_until(settings.t_pc);
  const Interval window = best_window(sim.microtubules(), settings.width, settings.scan_step);
  if (!(sim.tag_window(window) > 0.0))
    throw Error(ErrorKind::ZeroSignal, "no polymer inside the photoconversion window");
  sim.run();
  return turnover_from_trace(sim.trace(), window);
}

Histogram histogram(std::span<const double> values, double bin_width, double origin) {
  if (!(bin_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bin width must be positive");
  Histogram h;
  bool any = false;
  long k_min = 0, k_max = 0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    const auto k = static_cast<long>(std::floor((v - origin) / bin_width));
    k_min = any ? std::min(k_min, k) : k;
    k_max = any ? std::max(k_max, k) : k;
    any = true;
  }
  if (!any) return h;
  const auto bins = static_cast<std::size_t>(k_max - k_min + 1);
  h.count.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b) {
    h.left.push_back(origin + static_cast<double>(k_min + static_cast<long>(b)) * bin_width);
    h.right.push_back(h.left.back() + bin_width);
  }
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    const auto k = static_cast<long>(std::floor((v - origin) / bin_width));
    ++h.count[static_cast<std::size_t>(k - k_min)];
  }
  return h;
}

}  // namespace mtlen
