#pragma once

// Independent reference computations used only by tests.  Everything here is
// derived from first principles (series summation, finite differences,
// hit-or-miss volume estimation, one-dimensional quadrature) and deliberately
// avoids the closed forms used by the library.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "liewalk/lie_group.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/rng.hpp"

namespace oracles {

/// Matrix exponential by scaling-and-squaring with a plain Taylor series.
Eigen::MatrixXd series_exp(const Eigen::MatrixXd& x);

/// Jacobian matrix of y -> log(exp(x0) * exp(y)) at y = 0 by central
/// finite differences in chart coordinates.
Eigen::MatrixXd chart_shift_derivative(const liewalk::LieGroupModel& model,
                                       const Eigen::VectorXd& x0,
                                       double step = 1e-5);

struct VolumeRatio {
  double value = 0.0;      ///< Monte Carlo estimate of the chart Jacobian
  double std_error = 0.0;  ///< binomial standard error of the estimate
};

/// Hit-or-miss volume-ratio estimate of the chart Jacobian at x0: the volume
/// of log(exp(x0) * exp(S)) for a small coordinate box S, divided by the
/// volume of S.  Sampling happens in a padded parallelepiped aligned with the
/// finite-difference derivative, so the only model knowledge used is the
/// exp/log chart itself.
VolumeRatio mc_volume_jacobian(const liewalk::LieGroupModel& model,
                               const Eigen::VectorXd& x0, double box_side,
                               std::int64_t n_samples, liewalk::RngStream rng,
                               double pad = 1.05);

/// Density of the Gaussian with scale r truncated to [-ar, ar], normalized
/// by the erf closed form.
struct TruncGauss1D {
  double a, r, c;
  TruncGauss1D(double a_, double r_);
  double operator()(double t) const;
};

/// Mixture of shifted copies of one truncated Gaussian.
struct TruncMix1D {
  std::vector<double> pos, w;
  TruncGauss1D f;
  double operator()(double t) const;
  std::vector<double> breaks() const;
};

std::vector<double> sorted_breaks(std::vector<double> b);

double mass_quad(const std::function<double(double)>& f,
                 const std::vector<double>& breaks);

/// Entropy of a finite measure on the line with density f: the mass times
/// the entropy of the normalized density, i.e. -int f log f + m log m.
double finite_entropy_quad(const std::function<double(double)>& f,
                           const std::vector<double>& breaks);

/// E over y of the posterior variance of a discrete law at positions pos
/// with weights w, observed through the truncated-Gaussian blur (a, r):
/// integrates marginal(y) * var(posterior at y) between the support kinks.
double conditional_variance_quad(const std::vector<double>& pos,
                                 const std::vector<double>& w, double a,
                                 double r);

/// One terminal path of a cost-stopped walk: the left-to-right product of
/// the generators drawn, the exact path probability, and the step count.
struct BrutePath {
  liewalk::GroupElement element;
  liewalk::Rational weight;
  int steps = 0;
};

/// Depth-first enumeration of every generator sequence of mu stopped at the
/// first step where the accumulated cost reaches the threshold.  No merging
/// of any kind: one entry per path.  Throws std::runtime_error past cap.
std::vector<BrutePath> brute_stopped_paths(
    const liewalk::FinSuppMeasure& mu,
    const std::vector<liewalk::Rational>& costs,
    const liewalk::Rational& threshold, int cap);

}  // namespace oracles
