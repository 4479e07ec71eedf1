#include "liewalk/lie_group.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "liewalk/errors.hpp"

namespace liewalk {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kRelTol = 1e-12;

void require_same_model(const LieGroupModel& a, const LieGroupModel& b) {
  if (a != b) {
    throw ModelMismatch("elements belong to different group models: " +
                        a.name() + " vs " + b.name());
  }
}

Rational det2(const RatMat& m) {
  return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

Rational det3(const RatMat& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

Eigen::Matrix3d embed(const Eigen::MatrixXd& m) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Identity();
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

}  // namespace

LieGroupModel LieGroupModel::abelian(int dim) {
  if (dim < 1) throw Error("abelian dimension must be >= 1");
  return LieGroupModel(GroupKind::Abelian, dim, 1.0);
}
LieGroupModel LieGroupModel::sl2r() {
  return LieGroupModel(GroupKind::SL2R, 3, 0.5);
}
LieGroupModel LieGroupModel::so3() {
  return LieGroupModel(GroupKind::SO3, 3, M_PI - 0.01);
}
LieGroupModel LieGroupModel::heisenberg3() {
  return LieGroupModel(GroupKind::Heisenberg3, 3, 1.0);
}

int LieGroupModel::matrix_size() const {
  switch (kind_) {
    case GroupKind::Abelian:
      return 0;
    case GroupKind::SL2R:
      return 2;
    default:
      return 3;
  }
}

std::string LieGroupModel::name() const {
  switch (kind_) {
    case GroupKind::Abelian:
      return "Abelian(" + std::to_string(dim_) + ")";
    case GroupKind::SL2R:
      return "SL2R";
    case GroupKind::SO3:
      return "SO3";
    case GroupKind::Heisenberg3:
      return "Heisenberg3";
  }
  return "?";
}

namespace detail {

double sinhc(double z) {
  if (std::abs(z) < 1e-8) {
    return 1.0 + z / 6.0 + z * z / 120.0;
  }
  if (z > 0) {
    const double w = std::sqrt(z);
    return std::sinh(w) / w;
  }
  const double w = std::sqrt(-z);
  return std::sin(w) / w;
}

double coshc(double z) {
  if (std::abs(z) < 1e-8) {
    return 1.0 + z / 2.0 + z * z / 24.0;
  }
  if (z > 0) return std::cosh(std::sqrt(z));
  return std::cos(std::sqrt(-z));
}

Eigen::Matrix3d exp_mat(GroupKind kind, const Eigen::Vector3d& x) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Identity();
  switch (kind) {
    case GroupKind::SL2R: {
      // X = [[x3/s2, x1], [x2, -x3/s2]]; X^2 = omega2 * I.
      const double d = x[2] / kSqrt2;
      const double omega2 = d * d + x[0] * x[1];
      const double c = coshc(omega2);
      const double s = sinhc(omega2);
      out(0, 0) = c + s * d;
      out(0, 1) = s * x[0];
      out(1, 0) = s * x[1];
      out(1, 1) = c - s * d;
      return out;
    }
    case GroupKind::SO3: {
      const double th2 = x.squaredNorm();
      const double A = sinhc(-th2);  // sin(theta)/theta
      // (1 - cos(theta))/theta^2
      const double B = th2 < 1e-8
                           ? 0.5 - th2 / 24.0 + th2 * th2 / 720.0
                           : (1.0 - std::cos(std::sqrt(th2))) / th2;
      Eigen::Matrix3d K;
      K << 0, -x[2], x[1], x[2], 0, -x[0], -x[1], x[0], 0;
      out += A * K + B * (K * K);
      return out;
    }
    case GroupKind::Heisenberg3: {
      out(0, 1) = x[0];
      out(1, 2) = x[1];
      out(0, 2) = x[2] + 0.5 * x[0] * x[1];
      return out;
    }
    default:
      return out;
  }
}

std::optional<Eigen::Vector3d> log_coords(GroupKind kind,
                                          const Eigen::Matrix3d& m) {
  switch (kind) {
    case GroupKind::SL2R: {
      const double t = 0.5 * (m(0, 0) + m(1, 1));
      if (t <= -1.0 + 1e-12) return std::nullopt;
      const double u = t - 1.0;
      double phi;
      if (std::abs(u) <= 1e-5) {
        phi = 1.0 - u / 3.0 + 2.0 * u * u / 15.0;
      } else if (t > 1.0) {
        const double lam = std::acosh(t);
        phi = lam / std::sinh(lam);
      } else {
        const double lam = std::acos(t);
        phi = lam / std::sin(lam);
      }
      // Traceless part scaled back to the algebra.
      const double a = phi * (m(0, 0) - t);
      Eigen::Vector3d x;
      x[0] = phi * m(0, 1);
      x[1] = phi * m(1, 0);
      x[2] = kSqrt2 * a;
      return x;
    }
    case GroupKind::SO3: {
      const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
      Eigen::Vector3d w;
      w[0] = 0.5 * (m(2, 1) - m(1, 2));
      w[1] = 0.5 * (m(0, 2) - m(2, 0));
      w[2] = 0.5 * (m(1, 0) - m(0, 1));
      const double s = w.norm();  // |sin(theta)|
      const double theta = std::atan2(s, c);
      if (c > 0.0 && theta < 1e-4) {
        return Eigen::Vector3d(w * (1.0 + theta * theta / 6.0));
      }
      if (s < 1e-9) return std::nullopt;  // at or next to angle pi
      return Eigen::Vector3d(w * (theta / s));
    }
    case GroupKind::Heisenberg3: {
      Eigen::Vector3d x;
      x[0] = m(0, 1);
      x[1] = m(1, 2);
      x[2] = m(0, 2) - 0.5 * m(0, 1) * m(1, 2);
      return x;
    }
    default:
      return std::nullopt;
  }
}

double jacobian_from_coords(GroupKind kind, const Eigen::Vector3d& x,
                            double norm2) {
  switch (kind) {
    case GroupKind::SL2R: {
      const double d = x[2] / kSqrt2;
      const double omega2 = d * d + x[0] * x[1];
      const double s = sinhc(omega2);
      return 1.0 / (s * s);
    }
    case GroupKind::SO3: {
      const double s = sinhc(-norm2 / 4.0);
      return 1.0 / (s * s);
    }
    default:
      return 1.0;
  }
}

}  // namespace detail

GroupElement GroupElement::identity(const LieGroupModel& m) {
  GroupElement g(m);
  if (m.kind() == GroupKind::Abelian) {
    g.vec_ = Eigen::VectorXd::Zero(m.dim());
    g.exact_ = RatMat(m.dim(), 1);
  } else {
    g.exact_ = RatMat::identity(m.matrix_size());
  }
  return g;
}

GroupElement GroupElement::from_matrix(const LieGroupModel& m,
                                       const Eigen::MatrixXd& rep) {
  if (m.kind() == GroupKind::Abelian) {
    throw ModelMismatch("abelian elements are built with from_vector");
  }
  const int n = m.matrix_size();
  if (rep.rows() != n || rep.cols() != n) {
    throw Error("wrong matrix shape for " + m.name());
  }
  switch (m.kind()) {
    case GroupKind::SL2R: {
      const double det = rep(0, 0) * rep(1, 1) - rep(0, 1) * rep(1, 0);
      if (std::abs(det - 1.0) > kRelTol) {
        throw Error("matrix is not in SL2R: det deviates by more than 1e-12");
      }
      break;
    }
    case GroupKind::SO3: {
      const Eigen::Matrix3d r = rep;
      if ((r.transpose() * r - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() > kRelTol ||
          r.determinant() < 0.0) {
        throw Error("matrix is not in SO3 within 1e-12");
      }
      break;
    }
    case GroupKind::Heisenberg3: {
      const bool upper_unit =
          std::abs(rep(0, 0) - 1) <= kRelTol && std::abs(rep(1, 1) - 1) <= kRelTol &&
          std::abs(rep(2, 2) - 1) <= kRelTol && std::abs(rep(1, 0)) <= kRelTol &&
          std::abs(rep(2, 0)) <= kRelTol && std::abs(rep(2, 1)) <= kRelTol;
      if (!upper_unit) {
        throw Error("matrix is not unit upper-triangular within 1e-12");
      }
      break;
    }
    default:
      break;
  }
  GroupElement g(m);
  g.mat_ = embed(rep);
  return g;
}

GroupElement GroupElement::from_matrix(const LieGroupModel& m,
                                       const RatMat& rep) {
  if (m.kind() == GroupKind::Abelian) {
    throw ModelMismatch("abelian elements are built with from_vector");
  }
  const int n = m.matrix_size();
  if (rep.rows() != n || rep.cols() != n) {
    throw Error("wrong matrix shape for " + m.name());
  }
  switch (m.kind()) {
    case GroupKind::SL2R:
      if (det2(rep) != 1) throw Error("matrix is not in SL2R: det != 1");
      break;
    case GroupKind::SO3: {
      if (rep.transpose() * rep != RatMat::identity(3) || det3(rep) != 1) {
        throw Error("matrix is not in SO3 (exact check)");
      }
      break;
    }
    case GroupKind::Heisenberg3: {
      const bool ok = rep(0, 0) == 1 && rep(1, 1) == 1 && rep(2, 2) == 1 &&
                      rep(1, 0) == 0 && rep(2, 0) == 0 && rep(2, 1) == 0;
      if (!ok) throw Error("matrix is not unit upper-triangular (exact check)");
      break;
    }
    default:
      break;
  }
  GroupElement g(m);
  g.mat_ = embed(rep.to_double());
  g.exact_ = rep;
  return g;
}

GroupElement GroupElement::from_vector(const LieGroupModel& m,
                                       const Eigen::VectorXd& v) {
  if (m.kind() != GroupKind::Abelian) {
    throw ModelMismatch("from_vector applies to abelian models only");
  }
  if (v.size() != m.dim()) throw Error("wrong vector dimension");
  GroupElement g(m);
  g.vec_ = v;
  g.exact_ = RatMat::from_double(v);
  return g;
}

GroupElement GroupElement::from_vector(const LieGroupModel& m, const RatMat& v) {
  if (m.kind() != GroupKind::Abelian) {
    throw ModelMismatch("from_vector applies to abelian models only");
  }
  if (v.rows() != m.dim() || v.cols() != 1) throw Error("wrong vector shape");
  GroupElement g(m);
  g.vec_ = v.to_double();
  g.exact_ = v;
  return g;
}

Eigen::MatrixXd GroupElement::matrix() const {
  if (model_.kind() == GroupKind::Abelian) return vec_;
  const int n = model_.matrix_size();
  return mat_.topLeftCorner(n, n);
}

Eigen::VectorXd GroupElement::flat() const {
  if (model_.kind() == GroupKind::Abelian) return vec_;
  Eigen::VectorXd out(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[3 * i + j] = mat_(i, j);
  return out;
}

GroupElement multiply(const GroupElement& a, const GroupElement& b) {
  require_same_model(a.model_, b.model_);
  GroupElement g(a.model_);
  const bool exact = a.exact_.has_value() && b.exact_.has_value();
  if (a.model_.kind() == GroupKind::Abelian) {
    if (exact) {
      g.exact_ = *a.exact_ + *b.exact_;
      g.vec_ = g.exact_->to_double();
    } else {
      g.vec_ = a.vec_ + b.vec_;
    }
    return g;
  }
  if (exact) {
    g.exact_ = *a.exact_ * *b.exact_;
    g.mat_ = embed(g.exact_->to_double());
  } else {
    g.mat_ = a.mat_ * b.mat_;
  }
  return g;
}

GroupElement inverse(const GroupElement& g) {
  GroupElement out(g.model_);
  switch (g.model_.kind()) {
    case GroupKind::Abelian:
      if (g.exact_) {
        out.exact_ = -*g.exact_;
        out.vec_ = out.exact_->to_double();
      } else {
        out.vec_ = -g.vec_;
      }
      return out;
    case GroupKind::SL2R: {
      if (g.exact_) {
        RatMat inv(2, 2);
        inv(0, 0) = (*g.exact_)(1, 1);
        inv(0, 1) = -(*g.exact_)(0, 1);
        inv(1, 0) = -(*g.exact_)(1, 0);
        inv(1, 1) = (*g.exact_)(0, 0);
        out.exact_ = inv;
        out.mat_ = embed(inv.to_double());
      } else {
        out.mat_ = Eigen::Matrix3d::Identity();
        out.mat_(0, 0) = g.mat_(1, 1);
        out.mat_(0, 1) = -g.mat_(0, 1);
        out.mat_(1, 0) = -g.mat_(1, 0);
        out.mat_(1, 1) = g.mat_(0, 0);
      }
      return out;
    }
    case GroupKind::SO3: {
      if (g.exact_) {
        out.exact_ = g.exact_->transpose();
        out.mat_ = embed(out.exact_->to_double());
      } else {
        out.mat_ = g.mat_.transpose();
      }
      return out;
    }
    case GroupKind::Heisenberg3: {
      if (g.exact_) {
        const RatMat& m = *g.exact_;
        RatMat inv = RatMat::identity(3);
        inv(0, 1) = -m(0, 1);
        inv(1, 2) = -m(1, 2);
        inv(0, 2) = m(0, 1) * m(1, 2) - m(0, 2);
        out.exact_ = inv;
        out.mat_ = embed(inv.to_double());
      } else {
        out.mat_ = Eigen::Matrix3d::Identity();
        out.mat_(0, 1) = -g.mat_(0, 1);
        out.mat_(1, 2) = -g.mat_(1, 2);
        out.mat_(0, 2) = g.mat_(0, 1) * g.mat_(1, 2) - g.mat_(0, 2);
      }
      return out;
    }
  }
  return out;
}

GroupElement exp_of(const AlgebraVector& x) {
  const LieGroupModel& m = x.model;
  if (x.coords.size() != m.dim()) throw Error("wrong coordinate dimension");
  GroupElement g(m);
  if (m.kind() == GroupKind::Abelian) {
    g.vec_ = x.coords;
    g.exact_ = RatMat::from_double(x.coords);
    return g;
  }
  g.mat_ = detail::exp_mat(m.kind(), Eigen::Vector3d(x.coords));
  if (m.kind() == GroupKind::Heisenberg3) {
    // Entries are plain doubles; the triangular relations hold exactly.
    g.exact_ = RatMat::from_double(g.mat_.topLeftCorner(3, 3));
  }
  return g;
}

std::optional<AlgebraVector> try_log(const GroupElement& g) {
  const LieGroupModel& m = g.model();
  if (m.kind() == GroupKind::Abelian) {
    return AlgebraVector{m, g.vec()};
  }
  const auto coords = detail::log_coords(m.kind(), g.mat3());
  if (!coords) return std::nullopt;
  if (!m.global_chart() && coords->norm() >= m.chart_radius()) {
    return std::nullopt;
  }
  return AlgebraVector{m, Eigen::VectorXd(*coords)};
}

AlgebraVector log_of(const GroupElement& g) {
  auto x = try_log(g);
  if (!x) {
    std::ostringstream oss;
    oss << "principal log unavailable on " << g.model().name()
        << " (outside the chart of radius " << g.model().chart_radius() << ")";
    throw OutsideChart(oss.str());
  }
  return *x;
}

ChartDistance distance(const GroupElement& g, const GroupElement& h) {
  require_same_model(g.model(), h.model());
  const LieGroupModel& m = g.model();
  if (m.kind() == GroupKind::Abelian) {
    return ChartDistance::exact((h.vec() - g.vec()).norm());
  }
  const Eigen::Matrix3d q = inverse(g).mat3() * h.mat3();
  const auto coords = detail::log_coords(m.kind(), q);
  if (m.global_chart()) {
    return ChartDistance::exact(coords->norm());
  }
  if (!coords || coords->norm() >= m.chart_radius()) {
    return ChartDistance::lower_bound(m.chart_radius());
  }
  return ChartDistance::exact(coords->norm());
}

double chart_jacobian(const AlgebraVector& x) {
  if (x.model.kind() == GroupKind::Abelian) return 1.0;
  const Eigen::Vector3d v(x.coords);
  return detail::jacobian_from_coords(x.model.kind(), v, v.squaredNorm());
}

bool approx_equal(const GroupElement& a, const GroupElement& b, double tol) {
  if (a.model() != b.model()) return false;
  return (a.flat() - b.flat()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace liewalk
