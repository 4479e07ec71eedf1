#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "liewalk/rational.hpp"

namespace liewalk {

enum class GroupKind { Abelian, SL2R, SO3, Heisenberg3 };

/// One of the supported matrix group models.
///
/// Algebra bases and inner products (fixing the meaning of |X| and of all
/// distances):
///  - Abelian(l): R^l under addition; exp is the identity map.
///  - SL2R: basis {E, F, H/sqrt(2)} with E = [[0,1],[0,0]], F = [[0,0],[1,0]],
///    H = diag(1,-1); the Frobenius inner product tr(X^T Y) makes this basis
///    orthonormal.  Coordinates (x1,x2,x3) map to x1*E + x2*F + x3*H/sqrt(2).
///  - SO3: rotation-vector coordinates; X = skew(w) and the inner product
///    tr(X^T Y)/2 makes |X| equal the rotation angle |w|.
///  - Heisenberg3: unit upper-triangular 3x3; basis {E12, E23, E13} is
///    Frobenius-orthonormal and coordinates (x,y,z) map to
///    x*E12 + y*E23 + z*E13.
///
/// chart_radius is the scale at which the log chart is trusted to realize the
/// left-invariant metric.  For SL2R and SO3 the principal log genuinely fails
/// past that scale, so distances saturate to a lower-bound sentinel there and
/// kernels must fit inside it.  For Abelian and Heisenberg3 exp is a global
/// diffeomorphism: log and distances are exact at every scale and the radius
/// is only a conventional reference value.
class LieGroupModel {
 public:
  static LieGroupModel abelian(int dim);
  static LieGroupModel sl2r();
  static LieGroupModel so3();
  static LieGroupModel heisenberg3();

  GroupKind kind() const { return kind_; }
  /// Algebra dimension l.
  int dim() const { return dim_; }
  double chart_radius() const { return chart_radius_; }
  /// True when exp is a global diffeomorphism (Abelian, Heisenberg3).
  bool global_chart() const {
    return kind_ == GroupKind::Abelian || kind_ == GroupKind::Heisenberg3;
  }
  /// True when the chart Jacobian is identically one.
  bool unit_jacobian() const { return global_chart(); }
  /// Side length of the natural matrix representation; 0 for Abelian.
  int matrix_size() const;
  std::string name() const;

  bool operator==(const LieGroupModel& o) const {
    return kind_ == o.kind_ && dim_ == o.dim_;
  }
  bool operator!=(const LieGroupModel& o) const { return !(*this == o); }

 private:
  LieGroupModel(GroupKind k, int dim, double radius)
      : kind_(k), dim_(dim), chart_radius_(radius) {}
  GroupKind kind_;
  int dim_;
  double chart_radius_;
};

/// Element of the Lie algebra in the model's orthonormal coordinates.
struct AlgebraVector {
  LieGroupModel model;
  Eigen::VectorXd coords;

  double norm() const { return coords.norm(); }
};

/// Distance value that may be a lower-bound sentinel.  `at_least == true`
/// means the true distance is >= value but exceeded the chart, so only the
/// bound is known.
struct ChartDistance {
  double value = 0.0;
  bool at_least = false;

  static ChartDistance exact(double v) { return {v, false}; }
  static ChartDistance lower_bound(double v) { return {v, true}; }
  /// Usable numeric value in either case (the true distance is >= this).
  double bound() const { return value; }
};

/// Group element with a double representation and, when constructed from
/// rational data, an exact rational representation that all group operations
/// propagate.  When `exact` is present the double representation is its
/// entrywise rounding.
class GroupElement {
 public:
  static GroupElement identity(const LieGroupModel& m);

  /// Matrix models; validates the model relations to 1e-12.
  static GroupElement from_matrix(const LieGroupModel& m,
                                  const Eigen::MatrixXd& rep);
  /// Matrix models with exact entries; validates the relations exactly.
  static GroupElement from_matrix(const LieGroupModel& m, const RatMat& rep);
  /// Abelian vector element.
  static GroupElement from_vector(const LieGroupModel& m,
                                  const Eigen::VectorXd& v);
  static GroupElement from_vector(const LieGroupModel& m, const RatMat& v);

  const LieGroupModel& model() const { return model_; }
  /// Natural-shape double representation (2x2 for SL2R, 3x3 for SO3 and
  /// Heisenberg3, l x 1 for Abelian).
  Eigen::MatrixXd matrix() const;
  /// Internal 3x3 storage for matrix models (SL2R embedded top-left).
  const Eigen::Matrix3d& mat3() const { return mat_; }
  const Eigen::VectorXd& vec() const { return vec_; }
  bool has_exact() const { return exact_.has_value(); }
  const RatMat& exact() const { return *exact_; }

  /// Flattened double representation, a deterministic sort key.
  Eigen::VectorXd flat() const;

 private:
  friend GroupElement multiply(const GroupElement&, const GroupElement&);
  friend GroupElement inverse(const GroupElement&);
  friend GroupElement exp_of(const AlgebraVector&);
  GroupElement(LieGroupModel m) : model_(m), mat_(Eigen::Matrix3d::Identity()) {}

  LieGroupModel model_;
  Eigen::Matrix3d mat_;   // matrix models; unused for Abelian
  Eigen::VectorXd vec_;   // Abelian; unused for matrix models
  std::optional<RatMat> exact_;
};

GroupElement multiply(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& g);

/// Exponential chart.  Exact closed forms per model; see the model docs for
/// basis conventions.
GroupElement exp_of(const AlgebraVector& x);

/// Principal logarithm in chart coordinates, or nullopt when it does not
/// exist or leaves the chart (SL2R, SO3).  Always defined on the
/// global-chart models.
std::optional<AlgebraVector> try_log(const GroupElement& g);

/// Like try_log but throws OutsideChart with context on failure.
AlgebraVector log_of(const GroupElement& g);

/// Left-invariant distance |log(g^{-1} h)|; saturates to a chart_radius
/// lower bound on the non-global models when the log is unavailable.
ChartDistance distance(const GroupElement& g, const GroupElement& h);

/// Density of the pushforward of Lebesgue measure on the algebra under exp,
/// relative to Haar measure at exp(X).  Exactly 1 on Abelian and
/// Heisenberg3; closed forms in ad_X for SL2R and SO3.
double chart_jacobian(const AlgebraVector& x);

/// Entrywise comparison of double representations.
bool approx_equal(const GroupElement& a, const GroupElement& b,
                  double tol = 1e-12);

namespace detail {

/// sum_k z^k / (2k+1)!  == sinh(sqrt(z))/sqrt(z) for z > 0,
/// sin(sqrt(-z))/sqrt(-z) for z < 0.  Entire in z.
double sinhc(double z);
/// sum_k z^k / (2k)!  == cosh(sqrt(z)) resp. cos(sqrt(-z)).
double coshc(double z);

/// Chart log for the matrix models on the raw 3x3 storage; no chart-radius
/// check (the caller applies it).  nullopt when no principal log exists.
std::optional<Eigen::Vector3d> log_coords(GroupKind kind,
                                          const Eigen::Matrix3d& m);

/// exp as raw 3x3 storage (SL2R embedded top-left).
Eigen::Matrix3d exp_mat(GroupKind kind, const Eigen::Vector3d& x);

/// Chart Jacobian from coordinates; norm2 = |x|^2.
double jacobian_from_coords(GroupKind kind, const Eigen::Vector3d& x,
                            double norm2);

}  // namespace detail

}  // namespace liewalk
