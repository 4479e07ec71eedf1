#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "liewalk/entropy.hpp"
#include "liewalk/kernel.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/rng.hpp"

namespace liewalk {

/// Posterior over the atoms of a finitely supported law after observing
/// y = g * exp(beta_{a,r}).  weights[i] is proportional to
/// p_i * group_density(k, g_i, y), normalized to sum to one.
struct PosteriorWeights {
  GroupElement observation;
  std::vector<double> weights;
};

/// Throws ZeroDensityObservation when y is outside the support of every
/// smoothed atom.
PosteriorWeights posterior_given_smoothed(const FinSuppMeasure& mu,
                                          const SmoothingKernel& k,
                                          const GroupElement& y);

/// Trace of the covariance matrix of log(g0^{-1} g), g ~ mu, by exact
/// summation over the atoms.  Throws OutsideChart naming the atoms whose
/// shift leaves the logarithm chart.
double trace_about(const GroupElement& g0, const FinSuppMeasure& mu);

/// E over y = g * exp(beta) of the posterior trace about the observation:
/// per sample, tr of the covariance of log(y^{-1} g_i) under the posterior
/// weights.  Monte Carlo with the deterministic chunked contract.
EntropyEstimate conditional_trace(const FinSuppMeasure& mu,
                                  const SmoothingKernel& k2,
                                  std::size_t n_samples, RngStream rng);

/// E over y = g * exp(beta_2) of the differential entropy of the posterior
/// mixture sum_i w_i(y) * (g_i * exp(beta_1)); estimates the conditional
/// entropy of g*exp(beta_1) given g*exp(beta_2).  Inner entropies use
/// resubstitution with max(32, floor(sqrt(n_samples))) samples each.
EntropyEstimate conditional_entropy_given_smoothed(const FinSuppMeasure& mu,
                                                   const SmoothingKernel& k1,
                                                   const SmoothingKernel& k2,
                                                   std::size_t n_samples,
                                                   RngStream rng);

/// Certified lower-bound witness for the trace at scale radius = 2ar.
struct TraceWitness {
  double t = 0.0;
  double radius = 0.0;
  /// Descriptor of the conditioning scheme that produced the bound.
  std::string scheme;
  double std_error = 0.0;
};

std::string to_json(const TraceWitness& w);

/// Conditions on the observation y = g * exp(beta_{a,2r}) and anchors at y
/// itself, so every sample satisfies |log(y^{-1} g)| <= 2ar by construction
/// (checked on each draw).  t = conditional trace / (2ar)^2.
TraceWitness trace_at_scale_witness(const FinSuppMeasure& mu, double a,
                                    double r, std::size_t n_samples,
                                    RngStream rng);

/// Residual of tr_{g0}(a*b) - tr_{g0}(a) - tr_e(b) for a ~ mu_a and
/// b = exp(beta_{a,r}), anchored at the first atom.  epsilon is the larger
/// of the atom spread about the anchor and the kernel radius.
struct TraceProductReport {
  double residual = 0.0;
  double std_error = 0.0;
  double epsilon = 0.0;
  double bound_constant = 0.0;
  /// |residual| <= bound_constant * epsilon^3 + 4 * std_error.
  bool within_bound = false;
};

/// Estimates the residual with the exact linear part subtracted per sample,
/// so the Monte Carlo noise scales with epsilon^3 rather than epsilon^2.
/// On models whose chart logarithm is additive the residual is identically
/// zero and no sampling is needed.
TraceProductReport trace_product_check(const FinSuppMeasure& mu_a,
                                       const SmoothingKernel& k,
                                       std::size_t n_samples, RngStream rng,
                                       double bound_constant = 10.0);

}  // namespace liewalk
