#include "liewalk/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace liewalk {

QuadResult integrate(const std::function<double(double)>& f, double a,
                     double b, double rel_tol) {
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 61>;
  QuadResult out;
  double err = 0.0;
  out.value = Integrator::integrate(f, a, b, 15, rel_tol, &err);
  out.error = err;
  return out;
}

QuadResult integrate_segments(const std::function<double(double)>& f,
                              const std::vector<double>& breakpoints,
                              double rel_tol) {
  QuadResult out;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) continue;
    const QuadResult piece =
        integrate(f, breakpoints[i], breakpoints[i + 1], rel_tol);
    out.value += piece.value;
    out.error += piece.error;
  }
  return out;
}

}  // namespace liewalk
