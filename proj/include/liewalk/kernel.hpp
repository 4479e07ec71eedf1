#pragma once

#include "liewalk/lie_group.hpp"
#include "liewalk/rng.hpp"

namespace liewalk {

struct KernelEntropy {
  /// Untruncated Gaussian reference (l/2) log(2 pi e r^2).
  double formula_value = 0.0;
  /// H(beta_{a,r}) by radial quadrature.
  double quadrature_value = 0.0;
};

/// The truncated-Gaussian smoothing pair (a, r): the algebra law beta_{a,r}
/// with density C_{a,r} exp(-|x|^2 / 2r^2) on |x| <= ar, and its group
/// pushforward exp(beta_{a,r}).
///
/// All radial integrals are evaluated once at construction in the scaled
/// variable t = |x|/r, so every r-dependence below is an explicit power or
/// logarithm of r and the scaling identities hold to rounding error.
class SmoothingKernel {
 public:
  /// Requires a >= 1 and r > 0.  On models where the log chart is only
  /// local (SL2R, SO3) additionally requires a*r < chart_radius so the
  /// kernel support stays inside the chart.
  SmoothingKernel(const LieGroupModel& model, double a, double r);

  const LieGroupModel& model() const { return model_; }
  double a() const { return a_; }
  double r() const { return r_; }
  /// Truncation radius a*r of the algebra density.
  double radius() const { return a_ * r_; }

 private:
  friend double normalizing_constant(const SmoothingKernel&);
  friend KernelEntropy kernel_entropy(const SmoothingKernel&);
  friend double kernel_trace(const SmoothingKernel&);

  LieGroupModel model_;
  double a_ = 1.0;
  double r_ = 1.0;
  double j0_ = 0.0;  // int_0^a t^(l-1) exp(-t^2/2) dt
  double j2_ = 0.0;  // int_0^a t^(l+1) exp(-t^2/2) dt
  double c1_ = 0.0;  // normalizing constant at r = 1
};

/// C_{a,r}; equals r^{-l} C_{a,1} exactly.
double normalizing_constant(const SmoothingKernel& k);

/// f_{a,r}(x): C_{a,r} exp(-|x|^2/2r^2) for |x| <= ar, zero beyond.
double algebra_density(const SmoothingKernel& k, const AlgebraVector& x);

/// Rejection sample from N(0, r^2 I) conditioned on |x| <= ar.
AlgebraVector sample_kernel(const SmoothingKernel& k, RngStream& rng);

/// exp of sample_kernel; always within distance ar of the identity.
GroupElement sample_group(const SmoothingKernel& k, RngStream& rng);

KernelEntropy kernel_entropy(const SmoothingKernel& k);

/// Trace of the covariance of beta_{a,r}; in (0, l r^2].
double kernel_trace(const SmoothingKernel& k);

/// Density of center * exp(beta_{a,r}) against Haar measure at x:
/// f_{a,r}(log(center^-1 x)) * chart_jacobian(...) inside the support,
/// zero at far points or where the log chart fails.
double group_density(const SmoothingKernel& k, const GroupElement& center,
                     const GroupElement& x);

/// Surface area of the unit sphere in R^l (2, 2*pi, 4*pi for l = 1,2,3).
double sphere_area(int l);

}  // namespace liewalk
