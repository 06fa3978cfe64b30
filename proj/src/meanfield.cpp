#include "mtlen/meanfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "mtlen/errors.hpp"

namespace mtlen {
namespace {

double michaelis_menten_free(double free, double F_half) {
  return free > 0.0 ? free / (F_half + free) : 0.0;
}

// Bisection for a function decreasing through zero on [lo, hi]; runs to machine precision.
double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi,
                         const char* what) {
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
    throw Error(ErrorKind::BracketFailure,
                std::string(what) + ": end-point signs do not bracket a root");
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = f(mid);
    if (v > 0.0) {
      lo = mid;
    } else if (v < 0.0) {
      hi = mid;
    } else {
      return mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

MeanFieldState rhs(const MeanFieldState& s, const ModelParams& p) {
  const auto& pre = p.prescribed;
  const double mm = michaelis_menten_free(pre.T_tot - pre.N * s.L, p.F_half);
  const double active = psi(p.psi_spec(), s.L);
  const auto cat = p.catastrophe();

  MeanFieldState d;
  d.L = (p.v_g_plus * s.g_plus + p.v_g_minus * s.g_minus) * mm -
        (p.v_s_plus * (1.0 - s.g_plus) + p.v_s_minus * (1.0 - s.g_minus)) * active;
  d.g_plus = (1.0 - s.g_plus) * p.lambda_sg_plus -
             s.g_plus * catastrophe_rate(cat, End::Plus, s.L);
  d.g_minus = (1.0 - s.g_minus) * p.lambda_sg_minus -
              s.g_minus * catastrophe_rate(cat, End::Minus, s.L);
  return d;
}

std::vector<TrajectoryPoint> integrate(const MeanFieldState& initial, const ModelParams& p,
                                       double t_end, const IntegratorOptions& options) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 3>;

  const double L_max = p.prescribed.T_tot / p.prescribed.N;
  auto clamp_state = [&](State& x) {
    x[0] = std::clamp(x[0], 0.0, L_max);
    x[1] = std::clamp(x[1], 0.0, 1.0);
    x[2] = std::clamp(x[2], 0.0, 1.0);
  };
  auto system = [&](const State& x, State& dxdt, double /*t*/) {
    const MeanFieldState d = rhs({x[0], x[1], x[2]}, p);
    dxdt = {d.L, d.g_plus, d.g_minus};
  };

  State x{initial.L, initial.g_plus, initial.g_minus};
  clamp_state(x);
  std::vector<TrajectoryPoint> out;
  out.push_back({0.0, {x[0], x[1], x[2]}});

  auto stepper = ode::make_controlled(options.abs_tol, options.rel_tol,
                                      ode::runge_kutta_dopri5<State>());
  double t = 0.0;
  double dt = options.initial_step;
  while (t < t_end) {
    dt = std::min({dt, t_end - t, options.max_step});
    const auto result = stepper.try_step(system, x, t, dt);
    if (result == ode::fail) {
      if (dt < options.min_step) {
        throw Error(ErrorKind::StepFailure, "mean-field integration: step size underflow");
      }
      continue;
    }
    clamp_state(x);
    out.push_back({t, {x[0], x[1], x[2]}});
  }
  return out;
}

std::pair<double, double> g_star(double L, const ModelParams& p) {
  const auto cat = p.catastrophe();
  const double gp = p.lambda_sg_plus / (p.lambda_sg_plus + catastrophe_rate(cat, End::Plus, L));
  const double gm = p.lambda_sg_minus / (p.lambda_sg_minus + catastrophe_rate(cat, End::Minus, L));
  return {gp, gm};
}

double h_balance(double L, const ModelParams& p) {
  const auto [gp, gm] = g_star(L, p);
  const MeanFieldState d = rhs({L, gp, gm}, p);
  return d.L / p.v_s_plus;
}

std::pair<double, double> g_star_nondim(double ell, const NondimGroups& g) {
  const double shape = phi(ell / g.ell_0);
  // The floor is lambda_min relative to each end's own rescue rate.
  const double floor_plus = g.lambda_min_tilde;
  const double floor_minus = g.lambda_min_tilde * g.lambda_sg_ratio;
  const double gp = 1.0 / (1.0 + std::max(floor_plus, (1.0 + g.eta_plus * shape) * g.lambda_pm_plus));
  const double gm =
      1.0 / (1.0 + std::max(floor_minus, (1.0 + g.eta_minus * shape) * g.lambda_pm_minus));
  return {gp, gm};
}

double h_balance_nondim(double ell, const NondimGroups& g) {
  const auto [gp, gm] = g_star_nondim(ell, g);
  const double free = g.T_tilde - g.N * ell;
  const double mm = michaelis_menten_free(free, g.f_half);
  const double h1 = g.v_pm_plus * (gp + gm / g.v_g_ratio) * mm;
  const double h0 = ((1.0 - gp) + (1.0 - gm) / g.v_s_ratio) * psi_of_ratio(g.alpha, ell / g.ell_crit);
  return h1 - h0;
}

SteadyState solve_steady_state(const ModelParams& p) {
  const double L_max = p.prescribed.T_tot / p.prescribed.N;
  SteadyState s;
  s.L_star = bisect_decreasing([&](double L) { return h_balance(L, p); }, 0.0, L_max,
                               "solve_steady_state");
  std::tie(s.g_plus_star, s.g_minus_star) = g_star(s.L_star, p);
  s.residual = std::abs(h_balance(s.L_star, p));
  return s;
}

SteadyState solve_steady_state_nondim(const NondimGroups& g) {
  SteadyState s;
  s.L_star = bisect_decreasing([&](double ell) { return h_balance_nondim(ell, g); }, 0.0,
                               g.T_tilde / g.N, "solve_steady_state_nondim");
  std::tie(s.g_plus_star, s.g_minus_star) = g_star_nondim(s.L_star, g);
  s.residual = std::abs(h_balance_nondim(s.L_star, g));
  return s;
}

double H1(double L, const ModelParams& p) {
  const auto& pre = p.prescribed;
  return (p.v_g_plus / p.v_s_plus) * michaelis_menten_free(pre.T_tot - pre.N * L, p.F_half);
}

double H0(double L, const ModelParams& p) {
  const auto [gp, gm] = g_star(L, p);
  const double v_s = p.v_s_plus / p.v_s_minus;
  const double v_g = p.v_g_plus / p.v_g_minus;
  return ((1.0 - gp) + (1.0 - gm) / v_s) / (gp + gm / v_g) * psi(p.psi_spec(), L);
}

HCurves H_curves(std::span<const double> L_grid, const ModelParams& p) {
  HCurves c;
  c.H0.reserve(L_grid.size());
  c.H1.reserve(L_grid.size());
  for (double L : L_grid) {
    c.H0.push_back(H0(L, p));
    c.H1.push_back(H1(L, p));
  }
  return c;
}

double H_intersection(const ModelParams& p) {
  const double L_max = p.prescribed.T_tot / p.prescribed.N;
  return bisect_decreasing([&](double L) { return H1(L, p) - H0(L, p); }, 0.0, L_max,
                           "H_intersection");
}

}  // namespace mtlen
