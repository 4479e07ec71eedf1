#pragma once

#include <functional>
#include <vector>

namespace liewalk {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
};

/// Adaptive Gauss-Kronrod integration of f over [a, b].
/// `rel_tol` is the target relative tolerance; the returned error field is
/// the integrator's own absolute-error estimate.
QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double rel_tol = 1e-13);

/// Integrate over consecutive segments defined by sorted breakpoints,
/// summing values and error estimates.  Used when the integrand has kinks at
/// known locations (e.g. truncation boundaries).
QuadResult integrate_segments(const std::function<double(double)>& f,
                              const std::vector<double>& breakpoints,
                              double rel_tol = 1e-13);

}  // namespace liewalk
