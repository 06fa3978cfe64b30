#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mtlen/params.hpp"

namespace mtlen {

/// Mean length (um) and growth-phase fractions of the mean-field model.
struct MeanFieldState {
  double L = 0.0;
  double g_plus = 0.0;
  double g_minus = 0.0;
};

struct SteadyState {
  double L_star = 0.0;
  double g_plus_star = 0.0;
  double g_minus_star = 0.0;
  double residual = 0.0;  // |h(L_star)|, dimensionless
};

/// Time derivative (per minute) of the mean-field ODE in dimensional form.
MeanFieldState rhs(const MeanFieldState& s, const ModelParams& p);

struct TrajectoryPoint {
  double t = 0.0;  // min
  MeanFieldState state;
};

struct IntegratorOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0.01;  // min
  double min_step = 1e-12;     // min; smaller accepted steps raise StepFailure
  double max_step = 5.0;       // min
};

/// Adaptive Dormand-Prince integration from t = 0 to t_end (minutes). Every accepted
/// step is recorded. The state is kept inside [0, T_tot/N] x [0,1]^2.
std::vector<TrajectoryPoint> integrate(const MeanFieldState& initial, const ModelParams& p,
                                       double t_end, const IntegratorOptions& options = {});

/// Steady growth fractions at a fixed length.
std::pair<double, double> g_star(double L, const ModelParams& p);

/// h(L) = h1(L) - h0(L), the nondimensional steady-state length balance.
double h_balance(double L, const ModelParams& p);

/// Same quantity evaluated directly in the nondimensional variables.
double h_balance_nondim(double ell, const NondimGroups& g);
std::pair<double, double> g_star_nondim(double ell, const NondimGroups& g);

/// Bisection on h over [0, T_tot/N]. Throws Error(BracketFailure) if the end signs agree.
SteadyState solve_steady_state(const ModelParams& p);

/// Bisection on h_balance_nondim over [0, T_tilde/N]; returns ell_* and g*.
SteadyState solve_steady_state_nondim(const NondimGroups& g);

struct HCurves {
  std::vector<double> H0;
  std::vector<double> H1;
};

/// H1 carries the total-tubulin dependence, H0 the length-dependent catastrophe.
double H0(double L, const ModelParams& p);
double H1(double L, const ModelParams& p);
HCurves H_curves(std::span<const double> L_grid, const ModelParams& p);

/// Root of H1 - H0 by bisection, independent of solve_steady_state.
double H_intersection(const ModelParams& p);

}  // namespace mtlen
