#pragma once

#include "mtlen/ratefns.hpp"

namespace mtlen {

/// Experimentally observed growth/shrink statistics. Speeds in um/min, durations in min.
struct ObservedQuantities {
  double v_g_max_plus = 9.0;
  double v_g_max_minus = 1.125;
  double v_g_bar_plus = 6.0;
  double v_g_bar_minus = 0.75;
  double tau_g_bar_plus = 2.0;
  double tau_g_bar_minus = 4.0;
  double v_s_bar_plus = 6.0;
  double v_s_bar_minus = 3.5;

  void validate() const;
};

/// Parameters chosen by the modeller rather than measured.
struct PrescribedParams {
  double T_tot = 1000.0;   // um of polymer-equivalent tubulin
  int N = 20;              // MTs sharing the pool
  double L_bar = 35.0;     // um, target mean length
  double L0 = 35.0;        // um, characteristic length
  double gamma = 0.0;      // 1/(um min)
  double lambda_min = 0.05;  // 1/min, catastrophe floor
  double tau_tub = 1.0;    // min, unavailable -> free timescale
  double dt_seconds = 1.0; // s, stochastic step
  double t_end = 300.0;    // min, simulated horizon

  /// Checks the prescribed-parameter invariants that do not involve calibration.
  void validate() const;
};

/// Complete dimensional parameter set: the inputs plus every implied parameter.
struct ModelParams {
  ObservedQuantities observed;
  PrescribedParams prescribed;

  double v_g_plus = 0.0;
  double v_g_minus = 0.0;
  double v_s_plus = 0.0;
  double v_s_minus = 0.0;
  double lambda_gs_plus = 0.0;
  double lambda_gs_minus = 0.0;
  double lambda_sg_plus = 0.0;
  double lambda_sg_minus = 0.0;
  double F_half = 0.0;
  double alpha = 1.0;
  double L_crit = 0.0;

  // z_max(alpha) - z for the Lambert-W_alpha argument used by calibrate();
  // small values mean the target length is close to unreachable.
  double feasibility_margin = 0.0;

  double v_g(End end) const { return end == End::Plus ? v_g_plus : v_g_minus; }
  double v_s(End end) const { return end == End::Plus ? v_s_plus : v_s_minus; }
  double lambda_sg(End end) const { return end == End::Plus ? lambda_sg_plus : lambda_sg_minus; }
  double lambda_gs(End end) const { return end == End::Plus ? lambda_gs_plus : lambda_gs_minus; }

  CatastropheSpec catastrophe() const;
  PsiSpec psi_spec() const;

  double dt_minutes() const { return prescribed.dt_seconds / 60.0; }

  /// Same innate parameters, different total tubulin (titration-style perturbation).
  ModelParams with_total_tubulin(double T_tot) const;

  /// Structural checks on the implied parameters (positivity, alpha range).
  void validate() const;
};

/// Both sides of the per-end steady-state balance
///   v_g_bar * lambda_sg / (v_s_bar * lambda_gs) = exp(-(Gamma(1+1/alpha) v_s_bar+ ln2 / (L_bar lambda_sg+))^alpha).
struct BalanceResidual {
  double plus = 0.0;
  double minus = 0.0;
  double max_abs() const;
};

BalanceResidual calibration_residual(const ModelParams& p);

/// Largest value of w * exp(-w^alpha), attained at w* = (1/alpha)^(1/alpha).
double lambert_w_alpha_max(double alpha);

/// Smaller root w in [0, (1/alpha)^(1/alpha)] of w * exp(-w^alpha) = z, to absolute
/// tolerance 1e-12. Throws Error(Infeasible) when z exceeds lambert_w_alpha_max(alpha).
double lambert_w_alpha(double z, double alpha);

/// Computes all implied parameters so the mean-field steady state sits at L_bar and
/// growth speeds/durations match the observed averages.
ModelParams calibrate(const ObservedQuantities& obs, const PrescribedParams& pre);

/// Dimensionless groups with t_char = 1/lambda_sg+ and L_char = L0.
struct NondimGroups {
  double v_pm_plus = 0, v_pm_minus = 0;
  double v_g_ratio = 0;
  double v_s_ratio = 0;
  double lambda_pm_plus = 0, lambda_pm_minus = 0;
  double lambda_gs_cross = 0;
  double lambda_sg_ratio = 0;
  double lambda_min_tilde = 0;
  double T_tilde = 0;
  double eta_plus = 0, eta_minus = 0;
  double alpha = 1;
  double delta_g_plus = 0, delta_g_minus = 0;
  double delta_s_plus = 0, delta_s_minus = 0;
  double f_half = 0;
  double ell_crit = 0;
  double ell_0 = 0;
  double t_char = 0;  // min
  double L_char = 0;  // um
  int N = 0;
};

NondimGroups nondimensionalize(const ModelParams& p);

/// Dimensional model constants recovered from the groups and (t_char, L_char).
struct DimensionalConstants {
  double v_g_plus, v_g_minus, v_s_plus, v_s_minus;
  double lambda_gs_plus, lambda_gs_minus, lambda_sg_plus, lambda_sg_minus;
  double lambda_min, gamma, L0, T_tot, F_half, L_crit, alpha;
};

DimensionalConstants redimensionalize(const NondimGroups& g);

}  // namespace mtlen
