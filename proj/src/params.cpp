#include "mtlen/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mtlen/errors.hpp"

namespace mtlen {
namespace {

void require(bool ok, const char* message) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, message);
}

}  // namespace

void ObservedQuantities::validate() const {
  require(v_g_max_plus > 0 && v_g_max_minus > 0, "observed: max growth speeds must be positive");
  require(v_g_bar_plus > 0 && v_g_bar_minus > 0, "observed: average growth speeds must be positive");
  require(tau_g_bar_plus > 0 && tau_g_bar_minus > 0, "observed: growth durations must be positive");
  require(v_s_bar_plus > 0 && v_s_bar_minus > 0, "observed: shrink speeds must be positive");
  require(v_g_bar_plus < v_g_max_plus && v_g_bar_minus < v_g_max_minus,
          "observed: average growth speed must be below the maximum");
  const double r_plus = v_g_bar_plus / v_g_max_plus;
  const double r_minus = v_g_bar_minus / v_g_max_minus;
  require(std::abs(r_plus - r_minus) <= 1e-9 * std::max(r_plus, r_minus),
          "observed: plus and minus growth-speed fractions must coincide");
}

void PrescribedParams::validate() const {
  require(T_tot > 0, "prescribed: T_tot must be positive");
  require(N >= 1, "prescribed: N must be at least 1");
  require(L_bar > 0 && L0 > 0, "prescribed: lengths must be positive");
  require(gamma >= 0, "prescribed: gamma must be >= 0");
  require(lambda_min > 0, "prescribed: lambda_min must be positive");
  require(tau_tub > 0, "prescribed: tau_tub must be positive");
  require(dt_seconds > 0, "prescribed: dt must be positive");
  require(t_end > 0, "prescribed: t_end must be positive");
}

CatastropheSpec ModelParams::catastrophe() const {
  return CatastropheSpec{prescribed.L0, lambda_gs_plus, lambda_gs_minus, prescribed.gamma,
                         prescribed.lambda_min};
}

PsiSpec ModelParams::psi_spec() const { return PsiSpec{alpha, L_crit}; }

ModelParams ModelParams::with_total_tubulin(double T_tot) const {
  require(T_tot > 0, "T_tot must be positive");
  ModelParams copy = *this;
  copy.prescribed.T_tot = T_tot;
  return copy;
}

void ModelParams::validate() const {
  prescribed.validate();
  require(v_g_plus > 0 && v_s_plus > 0, "model: plus-end speeds must be positive");
  require(v_g_minus >= 0 && v_s_minus >= 0, "model: minus-end speeds must be non-negative");
  require(lambda_sg_plus > 0 && lambda_sg_minus > 0, "model: rescue rates must be positive");
  require(F_half > 0, "model: F_half must be positive");
  catastrophe().validate();
  psi_spec().validate();
}

double BalanceResidual::max_abs() const { return std::max(std::abs(plus), std::abs(minus)); }

BalanceResidual calibration_residual(const ModelParams& p) {
  const auto& o = p.observed;
  const double G = weibull_mean(p.alpha);
  const double rhs = std::exp(-std::pow(G * o.v_s_bar_plus * std::numbers::ln2 /
                                            (p.prescribed.L_bar * p.lambda_sg_plus),
                                        p.alpha));
  BalanceResidual r;
  r.plus = o.v_g_bar_plus * p.lambda_sg_plus / (o.v_s_bar_plus * p.lambda_gs_plus) - rhs;
  r.minus = o.v_g_bar_minus * p.lambda_sg_minus / (o.v_s_bar_minus * p.lambda_gs_minus) - rhs;
  return r;
}

double lambert_w_alpha_max(double alpha) {
  const double w_star = std::pow(1.0 / alpha, 1.0 / alpha);
  return w_star * std::exp(-std::pow(w_star, alpha));
}

double lambert_w_alpha(double z, double alpha) {
  require(z >= 0.0, "lambert_w_alpha: z must be >= 0");
  require(alpha >= 1.0, "lambert_w_alpha: alpha must be >= 1");
  if (z == 0.0) return 0.0;

  const double w_star = std::pow(1.0 / alpha, 1.0 / alpha);
  const double z_max = w_star * std::exp(-std::pow(w_star, alpha));
  if (z > z_max * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) {
    throw Error(ErrorKind::Infeasible,
                "target length unreachable: Lambert-W_alpha argument exceeds its maximum");
  }
  if (z >= z_max) return w_star;

  // w * exp(-w^alpha) is increasing on [0, w_star].
  double lo = 0.0;
  double hi = w_star;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(-std::pow(mid, alpha)) < z) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ModelParams calibrate(const ObservedQuantities& obs, const PrescribedParams& pre) {
  obs.validate();
  pre.validate();
  if (!(pre.T_tot > pre.N * pre.L_bar)) {
    throw Error(ErrorKind::NonPositiveFreePool,
                "T_tot must exceed N * L_bar for a positive Michaelis-Menten constant");
  }

  ModelParams p;
  p.observed = obs;
  p.prescribed = pre;
  p.v_g_plus = obs.v_g_max_plus;
  p.v_g_minus = obs.v_g_max_minus;
  p.v_s_plus = obs.v_s_bar_plus;
  p.v_s_minus = obs.v_s_bar_minus;
  p.lambda_gs_plus = 1.0 / obs.tau_g_bar_plus;
  p.lambda_gs_minus = 1.0 / obs.tau_g_bar_minus;
  p.alpha = 1.0 + pre.gamma * pre.L_bar * obs.tau_g_bar_plus;
  require(p.alpha <= 20.0, "calibrate: gamma * L_bar * tau_g_bar+ pushes alpha above 20");

  const double G = weibull_mean(p.alpha);
  const double z = obs.v_g_bar_plus * obs.tau_g_bar_plus / pre.L_bar * G * std::numbers::ln2;
  p.feasibility_margin = lambert_w_alpha_max(p.alpha) - z;
  const double w = lambert_w_alpha(z, p.alpha);

  p.lambda_sg_plus = obs.v_s_bar_plus / pre.L_bar * G * std::numbers::ln2 / w;
  p.lambda_sg_minus = p.lambda_sg_plus * (obs.v_s_bar_minus / obs.v_s_bar_plus) *
                      (obs.v_g_bar_plus * obs.tau_g_bar_plus) /
                      (obs.v_g_bar_minus * obs.tau_g_bar_minus);
  p.F_half = (obs.v_g_max_plus / obs.v_g_bar_plus - 1.0) * (pre.T_tot - pre.N * pre.L_bar);
  p.L_crit = p.v_s_plus * std::numbers::ln2 / p.lambda_sg_plus;

  p.catastrophe().validate();
  return p;
}

NondimGroups nondimensionalize(const ModelParams& p) {
  const auto& pre = p.prescribed;
  NondimGroups g;
  g.t_char = 1.0 / p.lambda_sg_plus;
  g.L_char = pre.L0;
  g.N = pre.N;
  g.v_pm_plus = p.v_g_plus / p.v_s_plus;
  g.v_pm_minus = p.v_g_minus / p.v_s_minus;
  g.v_g_ratio = p.v_g_plus / p.v_g_minus;
  g.v_s_ratio = p.v_s_plus / p.v_s_minus;
  g.lambda_pm_plus = p.lambda_gs_plus / p.lambda_sg_plus;
  g.lambda_pm_minus = p.lambda_gs_minus / p.lambda_sg_minus;
  g.lambda_gs_cross = p.lambda_gs_plus / p.lambda_sg_minus;
  g.lambda_sg_ratio = p.lambda_sg_plus / p.lambda_sg_minus;
  g.lambda_min_tilde = pre.lambda_min / p.lambda_sg_plus;
  g.T_tilde = pre.T_tot / g.L_char;
  g.eta_plus = pre.gamma * pre.L0 / p.lambda_gs_plus;
  g.eta_minus = pre.gamma * pre.L0 / p.lambda_gs_minus;
  g.alpha = p.alpha;
  g.delta_g_plus = (p.v_g_plus / p.lambda_gs_plus) / g.L_char;
  g.delta_g_minus = (p.v_g_minus / p.lambda_gs_minus) / g.L_char;
  g.delta_s_plus = (p.v_s_plus / p.lambda_sg_plus) / g.L_char;
  g.delta_s_minus = (p.v_s_minus / p.lambda_sg_minus) / g.L_char;
  g.f_half = p.F_half / g.L_char;
  g.ell_crit = p.L_crit / g.L_char;
  g.ell_0 = pre.L0 / g.L_char;
  return g;
}

DimensionalConstants redimensionalize(const NondimGroups& g) {
  DimensionalConstants d{};
  d.lambda_sg_plus = 1.0 / g.t_char;
  d.lambda_sg_minus = d.lambda_sg_plus / g.lambda_sg_ratio;
  d.lambda_gs_plus = g.lambda_pm_plus * d.lambda_sg_plus;
  d.lambda_gs_minus = g.lambda_pm_minus * d.lambda_sg_minus;
  d.v_s_plus = g.delta_s_plus * g.L_char * d.lambda_sg_plus;
  d.v_s_minus = g.delta_s_minus * g.L_char * d.lambda_sg_minus;
  d.v_g_plus = g.delta_g_plus * g.L_char * d.lambda_gs_plus;
  d.v_g_minus = g.delta_g_minus * g.L_char * d.lambda_gs_minus;
  d.L0 = g.ell_0 * g.L_char;
  d.gamma = g.eta_plus * d.lambda_gs_plus / d.L0;
  d.lambda_min = g.lambda_min_tilde * d.lambda_sg_plus;
  d.T_tot = g.T_tilde * g.L_char;
  d.F_half = g.f_half * g.L_char;
  d.L_crit = g.ell_crit * g.L_char;
  d.alpha = g.alpha;
  return d;
}

}  // namespace mtlen
