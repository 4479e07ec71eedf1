#include "liewalk/kernel.hpp"

#include <cmath>
#include <string>

#include "liewalk/errors.hpp"
#include "liewalk/quadrature.hpp"

namespace liewalk {

double sphere_area(int l) {
  return 2.0 * std::pow(M_PI, 0.5 * l) / std::tgamma(0.5 * l);
}

SmoothingKernel::SmoothingKernel(const LieGroupModel& model, double a, double r)
    : model_(model), a_(a), r_(r) {
  if (!(a >= 1.0)) {
    throw ConfigError("kernel needs a >= 1, got a = " + std::to_string(a));
  }
  if (!(r > 0.0)) {
    throw ConfigError("kernel needs r > 0, got r = " + std::to_string(r));
  }
  if (!model.global_chart() && !(a * r < model.chart_radius())) {
    throw ConfigError("kernel support a*r = " + std::to_string(a * r) +
                      " must stay below chart_radius = " +
                      std::to_string(model.chart_radius()) + " on " +
                      model.name());
  }
  const int l = model.dim();
  j0_ = integrate([l](double t) { return std::pow(t, l - 1) * std::exp(-0.5 * t * t); },
                  0.0, a)
            .value;
  j2_ = integrate([l](double t) { return std::pow(t, l + 1) * std::exp(-0.5 * t * t); },
                  0.0, a)
            .value;
  c1_ = 1.0 / (sphere_area(l) * j0_);
}

double normalizing_constant(const SmoothingKernel& k) {
  return k.c1_ * std::pow(k.r_, -static_cast<double>(k.model_.dim()));
}

double algebra_density(const SmoothingKernel& k, const AlgebraVector& x) {
  if (x.model != k.model()) {
    throw ModelMismatch("algebra vector is on " + x.model.name() +
                        " but the kernel is on " + k.model().name());
  }
  const double n = x.norm();
  if (n > k.radius()) return 0.0;
  const double t = n / k.r();
  return normalizing_constant(k) * std::exp(-0.5 * t * t);
}

AlgebraVector sample_kernel(const SmoothingKernel& k, RngStream& rng) {
  const int l = k.model().dim();
  Eigen::VectorXd x(l);
  for (;;) {
    int i = 0;
    while (i < l) {
      double z0, z1;
      rng.normal_pair(z0, z1);
      x[i++] = z0;
      if (i < l) x[i++] = z1;
    }
    if (x.norm() <= k.a()) return AlgebraVector{k.model(), k.r() * x};
  }
}

GroupElement sample_group(const SmoothingKernel& k, RngStream& rng) {
  return exp_of(sample_kernel(k, rng));
}

KernelEntropy kernel_entropy(const SmoothingKernel& k) {
  const int l = k.model().dim();
  KernelEntropy out;
  out.formula_value = 0.5 * l * (std::log(2.0 * M_PI) + 1.0 + 2.0 * std::log(k.r()));
  out.quadrature_value = l * std::log(k.r()) + std::log(sphere_area(l) * k.j0_) +
                         k.j2_ / (2.0 * k.j0_);
  return out;
}

double kernel_trace(const SmoothingKernel& k) {
  return k.r_ * k.r_ * k.j2_ / k.j0_;
}

double group_density(const SmoothingKernel& k, const GroupElement& center,
                     const GroupElement& x) {
  const auto shift = multiply(inverse(center), x);
  const auto lg = try_log(shift);
  if (!lg) return 0.0;
  const double f = algebra_density(k, *lg);
  if (f == 0.0) return 0.0;
  return f * chart_jacobian(*lg);
}

}  // namespace liewalk
