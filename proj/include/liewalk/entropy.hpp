#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "liewalk/kernel.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/rng.hpp"

namespace liewalk {

struct EntropyEstimate {
  double value = 0.0;
  /// Sample standard deviation of the per-sample values over sqrt(n).
  double std_error = 0.0;
  std::size_t n_samples = 0;
  /// Deterministic error allowance (quadrature tolerances, chart-distortion
  /// charges); reported separately, never folded into std_error.
  double bias_budget = 0.0;
};

namespace exec {
/// Process-wide worker count for chunked Monte Carlo.  Results are
/// byte-identical for every setting; this only controls wall-clock.
void set_threads(int n);
int threads();
}  // namespace exec

struct McMoments {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Deterministic chunked Monte Carlo mean: samples are drawn in chunks of
/// 4096, chunk i from base.fork(i), and per-chunk moments are reduced
/// pairwise in index order, so the result does not depend on the worker
/// count.
McMoments mc_mean(std::size_t n_samples, const RngStream& base,
                  const std::function<double(RngStream&)>& sample);

/// Precomputed evaluator for the density of mu * exp(beta_{a,r}) against
/// Haar.  Works on raw double representations so hot loops never touch
/// exact arithmetic.
class MixtureDensity {
 public:
  MixtureDensity(const FinSuppMeasure& mu, const SmoothingKernel& k);

  const LieGroupModel& model() const { return model_; }
  const SmoothingKernel& kernel() const { return kernel_; }
  std::size_t atom_count() const { return weights_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  const Eigen::Matrix3d& atom_mat(std::size_t i) const { return mats_[i]; }
  const Eigen::VectorXd& atom_vec(std::size_t i) const { return vecs_[i]; }
  /// Index of the atom owning u in [0,1) under the weight partition.
  std::size_t pick_atom(double u) const;

  double density(const GroupElement& x) const;
  double density_mat(const Eigen::Matrix3d& x) const;
  double density_vec(const Eigen::VectorXd& x) const;

  /// Per-component visit at x (matrix models): fn(i, L, wf) with L the chart
  /// coordinates of log(g_i^{-1} x) and wf = w_i * f_{a,r}(L) * j(L), called
  /// only for atoms whose component density is nonzero.
  template <class F>
  void for_components_mat(const Eigen::Matrix3d& x, F&& fn) const {
    for (std::size_t i = 0; i < inv_mats_.size(); ++i) {
      const Eigen::Matrix3d m = inv_mats_[i] * x;
      const auto lc = detail::log_coords(kind_, m);
      if (!lc) continue;
      const double n2 = lc->squaredNorm();
      if (n2 > radius2_) continue;
      const double f = c_ * std::exp(-0.5 * n2 * inv_r2_) *
                       detail::jacobian_from_coords(kind_, *lc, n2);
      fn(i, *lc, weights_[i] * f);
    }
  }
  /// Abelian counterpart; L = x - g_i and the Jacobian is one.
  template <class F>
  void for_components_vec(const Eigen::VectorXd& x, F&& fn) const {
    for (std::size_t i = 0; i < vecs_.size(); ++i) {
      const Eigen::VectorXd diff = x - vecs_[i];
      const double n2 = diff.squaredNorm();
      if (n2 > radius2_) continue;
      fn(i, diff, weights_[i] * c_ * std::exp(-0.5 * n2 * inv_r2_));
    }
  }

 private:
  LieGroupModel model_;
  SmoothingKernel kernel_;
  GroupKind kind_;
  double c_ = 0.0;
  double inv_r2_ = 0.0;
  double radius2_ = 0.0;
  std::vector<double> weights_;
  std::vector<double> cum_;
  std::vector<Eigen::Matrix3d> mats_, inv_mats_;
  std::vector<Eigen::VectorXd> vecs_;
};

/// Density of mu * exp(beta_{a,r}) at x: sum_i p_i group_density(k, g_i, x).
double mixture_density(const FinSuppMeasure& mu, const SmoothingKernel& k,
                       const GroupElement& x);

/// Monte-Carlo resubstitution estimate of H(mu * law(exp beta_{a,r})):
/// sample an atom by weight and a kernel point, evaluate -log mixture
/// density at the product.
EntropyEstimate smoothed_entropy(const FinSuppMeasure& mu,
                                 const SmoothingKernel& k,
                                 std::size_t n_samples, RngStream rng);

/// H(exp(beta_{a,r})): exact radial quadrature when the chart Jacobian is
/// identically one; Monte Carlo otherwise, charging bias_constant * a * r
/// for the chart distortion of the comparison formulas.
EntropyEstimate pushforward_entropy(const SmoothingKernel& k,
                                    std::size_t n_samples, RngStream rng,
                                    double bias_constant = 1.0);

/// Entropy at scale r: H(mu * s_{a,r}) - H(s_{a,r}).
EntropyEstimate entropy_at_scale(const FinSuppMeasure& mu,
                                 const SmoothingKernel& k,
                                 std::size_t n_samples, RngStream rng,
                                 double bias_constant = 1.0);

/// H_a(mu; r1) - H_a(mu; r2) with the sample budget split between scales.
EntropyEstimate entropy_between_scales(const FinSuppMeasure& mu, double a,
                                       double r1, double r2,
                                       std::size_t n_samples, RngStream rng,
                                       double bias_constant = 1.0);

/// Kullback-Leibler divergence in the sign convention where
/// D(nu || mu) = -E_nu[log(d nu / d mu)], so D(nu || Haar) is the
/// differential entropy of nu.
EntropyEstimate kl_divergence(
    const std::function<double(const GroupElement&)>& nu_density,
    const std::function<double(const GroupElement&)>& mu_density,
    const std::function<GroupElement(RngStream&)>& nu_sampler,
    std::size_t n_samples, RngStream rng);

/// Independent nearest-neighbor differential entropy estimate in chart
/// coordinates with the chart-Jacobian correction (returns the entropy of
/// exp of the sampled law).  Bias is O(n^{-1/l}).  Needs >= 1000 samples.
double knn_entropy_oracle(const std::vector<AlgebraVector>& samples);

}  // namespace liewalk
