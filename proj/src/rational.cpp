#include "liewalk/rational.hpp"

#include <cstdlib>
#include <stdexcept>

#include "liewalk/errors.hpp"

namespace liewalk {

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const std::string num = text.substr(0, slash);
    const std::string den = text.substr(slash + 1);
    mpz_class n, d;
    if (n.set_str(num, 10) != 0 || d.set_str(den, 10) != 0) {
      throw ConfigError("invalid rational literal: " + text);
    }
    if (d == 0) throw ConfigError("zero denominator: " + text);
    Rational q(n, d);
    q.canonicalize();
    return q;
  }
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw ConfigError("invalid numeric literal: " + text);
  }
  return Rational(v);
}

std::string rational_to_string(const Rational& q) {
  return q.get_str();
}

RatMat RatMat::identity(int n) {
  RatMat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RatMat RatMat::operator*(const RatMat& o) const {
  RatMat out(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const Rational& lik = (*this)(i, k);
      if (lik == 0) continue;
      for (int j = 0; j < o.cols_; ++j) {
        out(i, j) += lik * o(k, j);
      }
    }
  }
  return out;
}

RatMat RatMat::operator+(const RatMat& o) const {
  RatMat out(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] + o.a_[i];
  return out;
}

RatMat RatMat::operator-() const {
  RatMat out(rows_, cols_);
  for (size_t i = 0; i < a_.size(); ++i) out.a_[i] = -a_[i];
  return out;
}

RatMat RatMat::transpose() const {
  RatMat out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

bool RatMat::operator==(const RatMat& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) return false;
  for (size_t i = 0; i < a_.size(); ++i)
    if (a_[i] != o.a_[i]) return false;
  return true;
}

int RatMat::compare(const RatMat& x, const RatMat& y) {
  if (x.rows_ != y.rows_) return x.rows_ < y.rows_ ? -1 : 1;
  if (x.cols_ != y.cols_) return x.cols_ < y.cols_ ? -1 : 1;
  for (size_t i = 0; i < x.a_.size(); ++i) {
    const int c = cmp(x.a_[i], y.a_[i]);
    if (c != 0) return c;
  }
  return 0;
}

Eigen::MatrixXd RatMat::to_double() const {
  Eigen::MatrixXd out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).get_d();
  return out;
}

RatMat RatMat::from_double(const Eigen::MatrixXd& m) {
  RatMat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = Rational(m(i, j));
  return out;
}

}  // namespace liewalk
