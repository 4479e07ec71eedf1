#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "liewalk/lie_group.hpp"
#include "liewalk/rational.hpp"

namespace liewalk {

struct Atom {
  GroupElement element;
  Rational weight;
};

/// Finitely supported probability measure on a group model.  Atoms are kept
/// in a canonical sorted order with duplicate support points merged, so equal
/// measures have identical atom lists.  Weights are exact rationals and every
/// measure-level operation (convolution, renormalization, merging) is exact.
class FinSuppMeasure {
 public:
  static constexpr std::size_t kSupportCap = std::size_t(1) << 20;

  /// Validates: at least one positive weight, no negative weights, total
  /// weight within 1e-12 of one.  The total is then renormalized to exactly
  /// one and duplicate support points are merged.
  static FinSuppMeasure from_atoms(std::vector<Atom> atoms);
  static FinSuppMeasure dirac(const GroupElement& g);

  const LieGroupModel& model() const { return model_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  /// True when every support point carries an exact representation; then
  /// sorting and merging use exact comparisons.
  bool exact_support() const;

 private:
  explicit FinSuppMeasure(LieGroupModel m) : model_(m) {}
  LieGroupModel model_;
  std::vector<Atom> atoms_;
};

/// All pairwise products with multiplied weights, canonicalized.  Throws
/// SupportOverflow when the product support would exceed kSupportCap.
FinSuppMeasure convolve(const FinSuppMeasure& mu, const FinSuppMeasure& nu);

/// n-fold convolution power; n = 0 gives the point mass at the identity.
FinSuppMeasure convolution_power(const FinSuppMeasure& mu, int n);

/// Shannon entropy -sum_i w_i log w_i in nats.
double shannon_entropy(const FinSuppMeasure& mu);

struct SeparationReport {
  int n = 0;
  /// M_n: minimum pairwise distance over the union of the supports of
  /// mu^{*0}, ..., mu^{*n}.  A lower-bound sentinel when every minimizing
  /// pair exceeded the chart.
  ChartDistance min_distance;
  /// S_n = -(1/n) log M_n; absent when n = 0 or the support is a singleton.
  std::optional<double> rate;
  /// True when min_distance is only a lower bound, making the rate an upper
  /// bound on the true separation rate.
  bool rate_is_upper_bound = false;
  std::size_t pair_count = 0;
  std::size_t support_size = 0;
};

SeparationReport separation_rate(const FinSuppMeasure& mu, int n);

struct RwEntropyEstimate {
  /// min_{1 <= k <= n} H(mu^{*k}) / k, an upper bound on the random walk
  /// entropy that is exact in the limit.
  double value = 0.0;
  /// H(mu^{*k}) for k = 1..n.
  std::vector<double> entropies;
};

RwEntropyEstimate rw_entropy_estimate(const FinSuppMeasure& mu, int n);

}  // namespace liewalk
