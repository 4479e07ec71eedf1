#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liewalk/quadrature.hpp"

namespace oracles {

using liewalk::AlgebraVector;
using liewalk::GroupElement;
using liewalk::GroupKind;
using liewalk::LieGroupModel;
using liewalk::RngStream;

Eigen::MatrixXd series_exp(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  double norm = x.cwiseAbs().rowwise().sum().maxCoeff();  // inf norm
  int squarings = 0;
  Eigen::MatrixXd base = x;
  while (norm > 0.25) {
    base *= 0.5;
    norm *= 0.5;
    ++squarings;
  }
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = term * base / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-19) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

namespace {

Eigen::VectorXd chart_log(const GroupElement& g) {
  return liewalk::log_of(g).coords;
}

GroupElement chart_exp(const LieGroupModel& model, const Eigen::VectorXd& y) {
  return liewalk::exp_of(AlgebraVector{model, y});
}

}  // namespace

Eigen::MatrixXd chart_shift_derivative(const LieGroupModel& model,
                                       const Eigen::VectorXd& x0,
                                       double step) {
  const int l = model.dim();
  const GroupElement g0 = chart_exp(model, x0);
  Eigen::MatrixXd d(l, l);
  for (int i = 0; i < l; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(l);
    e[i] = step;
    const Eigen::VectorXd plus = chart_log(multiply(g0, chart_exp(model, e)));
    const Eigen::VectorXd minus =
        chart_log(multiply(g0, chart_exp(model, Eigen::VectorXd(-e))));
    d.col(i) = (plus - minus) / (2.0 * step);
  }
  return d;
}

VolumeRatio mc_volume_jacobian(const LieGroupModel& model,
                               const Eigen::VectorXd& x0, double box_side,
                               std::int64_t n_samples, RngStream rng,
                               double pad) {
  const int l = model.dim();
  const Eigen::MatrixXd d = chart_shift_derivative(model, x0);
  const GroupElement g0 = chart_exp(model, x0);
  const GroupElement g0_inv = inverse(g0);
  const Eigen::VectorXd psi0 = chart_log(g0);
  const double half = 0.5 * box_side;

  std::int64_t hits = 0;
  Eigen::VectorXd y(l);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    for (int k = 0; k < l; ++k) {
      y[k] = pad * box_side * (rng.uniform01() - 0.5);
    }
    const Eigen::VectorXd z = psi0 + d * y;
    // z lies in the log image of exp(x0)*exp(S) iff the pulled-back point
    // log(exp(-x0) * exp(z)) falls in the box S.
    const GroupElement back = multiply(g0_inv, chart_exp(model, z));
    const auto w = liewalk::try_log(back);
    if (!w) continue;
    bool inside = true;
    for (int k = 0; k < l; ++k) {
      if (std::abs(w->coords[k]) > half) {
        inside = false;
        break;
      }
    }
    if (inside) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  const double scale =
      std::abs(d.determinant()) * std::pow(pad, l);
  VolumeRatio out;
  out.value = scale * p;
  out.std_error =
      scale * std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
  return out;
}

TruncGauss1D::TruncGauss1D(double a_, double r_)
    : a(a_), r(r_),
      c(1.0 /
        (r_ * std::sqrt(2.0 * M_PI) * std::erf(a_ / std::sqrt(2.0)))) {}

double TruncGauss1D::operator()(double t) const {
  return std::abs(t) <= a * r ? c * std::exp(-0.5 * t * t / (r * r)) : 0.0;
}

double TruncMix1D::operator()(double t) const {
  double s = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) s += w[i] * f(t - pos[i]);
  return s;
}

std::vector<double> TruncMix1D::breaks() const {
  std::vector<double> b;
  for (double p : pos) {
    b.push_back(p - f.a * f.r);
    b.push_back(p + f.a * f.r);
  }
  return sorted_breaks(b);
}

std::vector<double> sorted_breaks(std::vector<double> b) {
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

double mass_quad(const std::function<double(double)>& f,
                 const std::vector<double>& breaks) {
  return liewalk::integrate_segments(f, breaks).value;
}

double finite_entropy_quad(const std::function<double(double)>& f,
                           const std::vector<double>& breaks) {
  const double m = mass_quad(f, breaks);
  const double raw = liewalk::integrate_segments(
                         [&](double t) {
                           const double v = f(t);
                           return v > 0.0 ? -v * std::log(v) : 0.0;
                         },
                         breaks)
                         .value;
  return raw + m * std::log(m);
}

double conditional_variance_quad(const std::vector<double>& pos,
                                 const std::vector<double>& w, double a,
                                 double r) {
  const TruncGauss1D f(a, r);
  std::vector<double> b;
  for (double p : pos) {
    b.push_back(p - a * r);
    b.push_back(p + a * r);
  }
  const auto breaks = sorted_breaks(b);
  return liewalk::integrate_segments(
             [&](double y) {
               double m = 0.0, m1 = 0.0, m2 = 0.0;
               for (std::size_t i = 0; i < pos.size(); ++i) {
                 const double li = w[i] * f(y - pos[i]);
                 m += li;
                 m1 += li * pos[i];
                 m2 += li * pos[i] * pos[i];
               }
               if (!(m > 0.0)) return 0.0;
               // marginal times posterior variance; the marginal cancels one
               // normalization, leaving m2/m - m1^2/m^2 scaled back by m.
               return m2 - m1 * m1 / m;
             },
             breaks)
      .value;
}

namespace {

void brute_rec(const std::vector<liewalk::Atom>& gens,
               const std::vector<liewalk::Rational>& costs,
               const liewalk::Rational& threshold, int cap,
               const liewalk::GroupElement& g, const liewalk::Rational& cost,
               const liewalk::Rational& weight, int steps,
               std::vector<BrutePath>& out) {
  if (cost >= threshold) {
    out.push_back({g, weight, steps});
    return;
  }
  if (steps >= cap) throw std::runtime_error("brute enumeration passed cap");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    brute_rec(gens, costs, threshold, cap,
              liewalk::multiply(g, gens[i].element), cost + costs[i],
              weight * gens[i].weight, steps + 1, out);
  }
}

}  // namespace

std::vector<BrutePath> brute_stopped_paths(
    const liewalk::FinSuppMeasure& mu,
    const std::vector<liewalk::Rational>& costs,
    const liewalk::Rational& threshold, int cap) {
  std::vector<BrutePath> out;
  brute_rec(mu.atoms(), costs, threshold, cap,
            liewalk::GroupElement::identity(mu.model()), 0, 1, 0, out);
  return out;
}

}  // namespace oracles
