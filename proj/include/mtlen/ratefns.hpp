#pragma once

#include <functional>

namespace mtlen {

enum class End { Plus, Minus };

/// Parameters of the length-dependent catastrophe (growth -> shrinking) rate.
///
/// The rate at length L is max(lambda_min, lambda_gs(end) + gamma * L0 * phi(L / L0)),
/// so it equals lambda_gs(end) at L = L0 and its slope is gamma wherever the floor
/// is inactive. Units: lengths in um, rates in 1/min, gamma in 1/(um min).
struct CatastropheSpec {
  double L0 = 35.0;
  double lambda_gs_plus = 0.5;
  double lambda_gs_minus = 0.25;
  double gamma = 0.0;
  double lambda_min = 0.05;

  double lambda_gs(End end) const { return end == End::Plus ? lambda_gs_plus : lambda_gs_minus; }

  /// Throws Error(InvalidArgument) when the invariants do not hold.
  void validate() const;
};

/// Weibull-shaped proportion of MTs with non-negligible length.
struct PsiSpec {
  double alpha = 1.0;  // shape, restricted to [1, 20]
  double L_crit = 1.0; // um

  void validate() const;
};

/// Catastrophe shape function, phi(x) = x - 1.
double phi(double x);

using ShapeFunction = std::function<double(double)>;

/// Checks phi(0) = -1, phi(1) = 0, phi'(1) = 1 (central difference) and
/// monotonicity on a grid over [0, x_max]. Continuity is assumed.
bool is_admissible_shape(const ShapeFunction& shape, double x_max = 10.0, double tol = 1e-6);

double catastrophe_rate(const CatastropheSpec& spec, End end, double length);

/// Gamma(1 + 1/alpha), the mean of a unit-scale Weibull(alpha).
double weibull_mean(double alpha);

/// psi_alpha(x) = exp(-(Gamma(1 + 1/alpha) / x)^alpha), extended by continuity with psi(0) = 0.
double psi_of_ratio(double alpha, double x);

/// psi_alpha(L / L_crit).
double psi(const PsiSpec& spec, double length);

}  // namespace mtlen
