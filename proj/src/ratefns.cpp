#include "mtlen/ratefns.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtlen/errors.hpp"

namespace mtlen {

void CatastropheSpec::validate() const {
  if (!(L0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "catastrophe: L0 must be positive");
  if (!(lambda_gs_plus > 0.0) || !(lambda_gs_minus > 0.0))
    throw Error(ErrorKind::InvalidArgument, "catastrophe: lambda_gs must be positive");
  if (!(gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "catastrophe: gamma must be >= 0");
  if (!(lambda_min > 0.0) || !(lambda_min < std::min(lambda_gs_plus, lambda_gs_minus)))
    throw Error(ErrorKind::InvalidArgument,
                "catastrophe: lambda_min must lie in (0, min(lambda_gs+, lambda_gs-))");
}

void PsiSpec::validate() const {
  if (!(alpha >= 1.0 && alpha <= 20.0))
    throw Error(ErrorKind::InvalidArgument, "psi: alpha must lie in [1, 20]");
  if (!(L_crit > 0.0)) throw Error(ErrorKind::InvalidArgument, "psi: L_crit must be positive");
}

double phi(double x) { return x - 1.0; }

bool is_admissible_shape(const ShapeFunction& shape, double x_max, double tol) {
  if (std::abs(shape(0.0) + 1.0) > tol) return false;
  if (std::abs(shape(1.0)) > tol) return false;
  const double h = 1e-5;
  const double slope = (shape(1.0 + h) - shape(1.0 - h)) / (2.0 * h);
  if (std::abs(slope - 1.0) > 1e3 * tol) return false;

  constexpr int kGrid = 1000;
  double prev = shape(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = shape(x_max * i / kGrid);
    if (!std::isfinite(v) || v < prev - tol) return false;
    prev = v;
  }
  return true;
}

double catastrophe_rate(const CatastropheSpec& spec, End end, double length) {
  const double linear = spec.lambda_gs(end) + spec.gamma * spec.L0 * phi(length / spec.L0);
  return std::max(spec.lambda_min, linear);
}

double weibull_mean(double alpha) { return std::tgamma(1.0 + 1.0 / alpha); }

double psi_of_ratio(double alpha, double x) {
  if (x <= 0.0) return 0.0;
  return std::exp(-std::pow(weibull_mean(alpha) / x, alpha));
}

double psi(const PsiSpec& spec, double length) {
  return psi_of_ratio(spec.alpha, length / spec.L_crit);
}

}  // namespace mtlen
