#pragma once

#include <cmath>
#include <utility>

namespace vortex::detail {

/// Golden-section maximization of a unimodal objective on [lo, hi] down to an
/// interval of width tol. Returns (argmax, value). Derivative-free, so mild
/// quadrature noise in the objective does not break it.
template <typename F>
std::pair<double, double> golden_section_max(F&& objective, double lo, double hi,
                                             double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, objective(x)};
}

}  // namespace vortex::detail
