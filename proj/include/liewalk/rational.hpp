#pragma once

#include <gmpxx.h>

#include <Eigen/Core>
#include <string>
#include <vector>

namespace liewalk {

/// Exact rational scalar.  Any double converts exactly (binary expansion),
/// so decimal config literals are carried as the nearest double's exact value
/// while "p/q" literals are carried verbatim.
using Rational = mpq_class;

/// Parse "p/q", an integer, or a decimal/scientific literal.
/// Decimal literals convert to the nearest double and are kept exact from
/// there; slash forms are exact rationals.
Rational parse_rational(const std::string& text);

/// Canonical text form: "p" or "p/q".
std::string rational_to_string(const Rational& q);

/// Dense matrix with exact rational entries.  Only the small shapes used by
/// the group models are needed, so the implementation is deliberately plain.
class RatMat {
 public:
  RatMat() : rows_(0), cols_(0) {}
  RatMat(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows * cols)) {}

  static RatMat identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Rational& operator()(int i, int j) { return a_[static_cast<size_t>(i * cols_ + j)]; }
  const Rational& operator()(int i, int j) const {
    return a_[static_cast<size_t>(i * cols_ + j)];
  }

  RatMat operator*(const RatMat& o) const;
  RatMat operator+(const RatMat& o) const;
  RatMat operator-() const;
  RatMat transpose() const;
  bool operator==(const RatMat& o) const;
  bool operator!=(const RatMat& o) const { return !(*this == o); }

  /// Lexicographic order on (rows, cols, entries); a strict weak ordering
  /// usable as a canonical sort key.
  static int compare(const RatMat& x, const RatMat& y);

  Eigen::MatrixXd to_double() const;

  /// Entrywise exact conversion from doubles.
  static RatMat from_double(const Eigen::MatrixXd& m);

  const std::vector<Rational>& flat() const { return a_; }

 private:
  int rows_, cols_;
  std::vector<Rational> a_;
};

}  // namespace liewalk
