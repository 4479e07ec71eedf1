#include "liewalk/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "liewalk/errors.hpp"

namespace liewalk {

namespace {

constexpr double kQuadBias = 1e-10;

struct PosteriorScratch {
  std::vector<double> w;
  double total = 0.0;
};

// Fills scratch.w with the unnormalized posterior masses of every atom at x.
template <class Mix>
void posterior_at(const Mix& mix, bool is_matrix, const GroupElement& x,
                  PosteriorScratch& s) {
  s.w.assign(mix.atom_count(), 0.0);
  s.total = 0.0;
  auto visit = [&](std::size_t i, const auto&, double wf) {
    s.w[i] = wf;
    s.total += wf;
  };
  if (is_matrix) {
    mix.for_components_mat(x.mat3(), visit);
  } else {
    mix.for_components_vec(x.vec(), visit);
  }
}

// Shared sampler for the expected posterior trace about the observation.
// hard_radius > 0 additionally asserts |log(y^{-1} g)| <= hard_radius on
// every draw, which the witness construction guarantees.
McMoments posterior_trace_mc(const FinSuppMeasure& mu,
                             const SmoothingKernel& k2, std::size_t n_samples,
                             RngStream rng, double hard_radius) {
  const MixtureDensity mix(mu, k2);
  const bool is_matrix = mu.model().matrix_size() > 0;
  const GroupKind kind = mu.model().kind();
  const int l = mu.model().dim();
  auto one = [&mix, is_matrix, kind, l, hard_radius](RngStream& r) -> double {
    const std::size_t i = mix.pick_atom(r.uniform01());
    const AlgebraVector z = sample_kernel(mix.kernel(), r);
    if (hard_radius > 0.0 &&
        z.coords.norm() > hard_radius * (1.0 + 1e-12)) {
      throw std::logic_error("witness sample escaped its certified radius");
    }
    double total = 0.0, sum2 = 0.0;
    if (is_matrix) {
      const Eigen::Matrix3d y =
          mix.atom_mat(i) * detail::exp_mat(kind, Eigen::Vector3d(z.coords));
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      mix.for_components_mat(
          y, [&](std::size_t, const Eigen::Vector3d& L, double wf) {
            // log(y^{-1} g_j) = -L for L = log(g_j^{-1} y).
            total += wf;
            sum2 += wf * L.squaredNorm();
            mean -= wf * L;
          });
      if (!(total > 0.0)) {
        throw ZeroDensityObservation(
            "smoothed draw has zero mixture density; chart inconsistency");
      }
      return std::max(0.0, sum2 / total - (mean / total).squaredNorm());
    }
    const Eigen::VectorXd y = mix.atom_vec(i) + z.coords;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(l);
    mix.for_components_vec(
        y, [&](std::size_t, const Eigen::VectorXd& L, double wf) {
          total += wf;
          sum2 += wf * L.squaredNorm();
          mean -= wf * L;
        });
    if (!(total > 0.0)) {
      throw ZeroDensityObservation(
          "smoothed draw has zero mixture density; chart inconsistency");
    }
    return std::max(0.0, sum2 / total - (mean / total).squaredNorm());
  };
  return mc_mean(n_samples, rng, one);
}

}  // namespace

PosteriorWeights posterior_given_smoothed(const FinSuppMeasure& mu,
                                          const SmoothingKernel& k,
                                          const GroupElement& y) {
  const MixtureDensity mix(mu, k);
  if (y.model() != mu.model()) {
    throw ModelMismatch("observation is on a different group model");
  }
  PosteriorScratch s;
  posterior_at(mix, mu.model().matrix_size() > 0, y, s);
  if (!(s.total > 0.0)) {
    throw ZeroDensityObservation(
        "observation lies outside the support of every smoothed atom");
  }
  for (double& w : s.w) w /= s.total;
  return {y, std::move(s.w)};
}

double trace_about(const GroupElement& g0, const FinSuppMeasure& mu) {
  if (g0.model() != mu.model()) {
    throw ModelMismatch("anchor is on a different group model");
  }
  const GroupElement inv0 = inverse(g0);
  const int l = mu.model().dim();
  double sum2 = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(l);
  std::string outside;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto lg = try_log(multiply(inv0, mu.atoms()[i].element));
    if (!lg) {
      outside += outside.empty() ? "" : ", ";
      outside += std::to_string(i);
      continue;
    }
    const double w = mu.atoms()[i].weight.get_d();
    sum2 += w * lg->coords.squaredNorm();
    mean += w * lg->coords;
  }
  if (!outside.empty()) {
    throw OutsideChart("atoms at indices {" + outside +
                       "} leave the chart about the anchor");
  }
  return std::max(0.0, sum2 - mean.squaredNorm());
}

EntropyEstimate conditional_trace(const FinSuppMeasure& mu,
                                  const SmoothingKernel& k2,
                                  std::size_t n_samples, RngStream rng) {
  const McMoments mm = posterior_trace_mc(mu, k2, n_samples, rng, 0.0);
  return {mm.mean, mm.std_error, n_samples, kQuadBias};
}

EntropyEstimate conditional_entropy_given_smoothed(const FinSuppMeasure& mu,
                                                   const SmoothingKernel& k1,
                                                   const SmoothingKernel& k2,
                                                   std::size_t n_samples,
                                                   RngStream rng) {
  const MixtureDensity mix1(mu, k1);
  const MixtureDensity mix2(mu, k2);
  const bool is_matrix = mu.model().matrix_size() > 0;
  const GroupKind kind = mu.model().kind();
  const std::size_t m_inner = std::max<std::size_t>(
      32, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_samples))));
  auto one = [&](RngStream& r) -> double {
    const std::size_t i = mix2.pick_atom(r.uniform01());
    const AlgebraVector z = sample_kernel(mix2.kernel(), r);
    PosteriorScratch post;
    if (is_matrix) {
      const Eigen::Matrix3d y =
          mix2.atom_mat(i) * detail::exp_mat(kind, Eigen::Vector3d(z.coords));
      post.w.assign(mix2.atom_count(), 0.0);
      mix2.for_components_mat(
          y, [&](std::size_t j, const Eigen::Vector3d&, double wf) {
            post.w[j] = wf;
            post.total += wf;
          });
    } else {
      const Eigen::VectorXd y = mix2.atom_vec(i) + z.coords;
      post.w.assign(mix2.atom_count(), 0.0);
      mix2.for_components_vec(
          y, [&](std::size_t j, const Eigen::VectorXd&, double wf) {
            post.w[j] = wf;
            post.total += wf;
          });
    }
    if (!(post.total > 0.0)) {
      throw ZeroDensityObservation(
          "smoothed draw has zero mixture density; chart inconsistency");
    }
    // coef[j] turns the base component mass w_j f_j into the posterior one.
    std::vector<double> coef(post.w.size());
    std::vector<double> cum(post.w.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < post.w.size(); ++j) {
      const double pw = post.w[j] / post.total;
      coef[j] = pw / mix1.weight(j);
      acc += pw;
      cum[j] = acc;
    }
    cum.back() = 1.0;
    auto conditional_density = [&](std::size_t j0, const AlgebraVector& z1) {
      double d = 0.0;
      if (is_matrix) {
        const Eigen::Matrix3d x =
            mix1.atom_mat(j0) *
            detail::exp_mat(kind, Eigen::Vector3d(z1.coords));
        mix1.for_components_mat(
            x, [&](std::size_t j, const Eigen::Vector3d&, double wf) {
              d += coef[j] * wf;
            });
      } else {
        const Eigen::VectorXd x = mix1.atom_vec(j0) + z1.coords;
        mix1.for_components_vec(
            x, [&](std::size_t j, const Eigen::VectorXd&, double wf) {
              d += coef[j] * wf;
            });
      }
      return d;
    };
    double inner = 0.0;
    for (std::size_t s = 0; s < m_inner; ++s) {
      const double u = r.uniform01();
      const std::size_t j0 = static_cast<std::size_t>(
          std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
      const AlgebraVector z1 = sample_kernel(mix1.kernel(), r);
      const double d =
          conditional_density(std::min(j0, cum.size() - 1), z1);
      if (!(d > 0.0)) {
        throw ZeroDensityObservation(
            "conditional mixture density vanished at its own sample");
      }
      inner -= std::log(d);
    }
    return inner / static_cast<double>(m_inner);
  };
  const McMoments mm = mc_mean(n_samples, rng, one);
  return {mm.mean, mm.std_error, n_samples, 2.0 * kQuadBias};
}

std::string to_json(const TraceWitness& w) {
  nlohmann::json j;
  j["t"] = w.t;
  j["radius"] = w.radius;
  j["scheme"] = w.scheme;
  j["std_error"] = w.std_error;
  return j.dump();
}

TraceWitness trace_at_scale_witness(const FinSuppMeasure& mu, double a,
                                    double r, std::size_t n_samples,
                                    RngStream rng) {
  const SmoothingKernel k2(mu.model(), a, 2.0 * r);
  const double radius = k2.radius();
  const McMoments mm =
      posterior_trace_mc(mu, k2, n_samples, rng, radius);
  TraceWitness w;
  w.radius = radius;
  w.t = std::max(0.0, mm.mean) / (radius * radius);
  w.std_error = mm.std_error / (radius * radius);
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "condition on y = g*exp(beta_{%g,%g}); anchor h = y", a,
                2.0 * r);
  w.scheme = buf;
  return w;
}

TraceProductReport trace_product_check(const FinSuppMeasure& mu_a,
                                       const SmoothingKernel& k,
                                       std::size_t n_samples, RngStream rng,
                                       double bound_constant) {
  if (mu_a.model() != k.model()) {
    throw ModelMismatch("measure and kernel are on different group models");
  }
  const auto& atoms = mu_a.atoms();
  const GroupElement g0 = atoms.front().element;
  const GroupElement inv0 = inverse(g0);
  const int l = mu_a.model().dim();

  std::vector<Eigen::VectorXd> shifts;
  Eigen::VectorXd m_az = Eigen::VectorXd::Zero(l);
  double spread = 0.0;
  std::string outside;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto lg = try_log(multiply(inv0, atoms[i].element));
    if (!lg) {
      outside += outside.empty() ? "" : ", ";
      outside += std::to_string(i);
      continue;
    }
    shifts.push_back(lg->coords);
    m_az += atoms[i].weight.get_d() * lg->coords;
    spread = std::max(spread, lg->coords.norm());
  }
  if (!outside.empty()) {
    throw OutsideChart("atoms at indices {" + outside +
                       "} leave the chart about the anchor");
  }

  TraceProductReport rep;
  rep.epsilon = std::max(spread, k.radius());
  rep.bound_constant = bound_constant;
  if (mu_a.model().matrix_size() == 0) {
    // log(g0^{-1} g_i exp(z)) = shift_i + z identically, so the two sides
    // agree as real numbers and no sampling is needed.
    rep.within_bound = true;
    return rep;
  }

  const MixtureDensity mix(mu_a, k);
  const GroupKind kind = mu_a.model().kind();
  auto draw = [&](RngStream& r, Eigen::Vector3d& d_out,
                  Eigen::Vector3d& lin_out) {
    const std::size_t i = mix.pick_atom(r.uniform01());
    const AlgebraVector z = sample_kernel(mix.kernel(), r);
    const Eigen::Matrix3d y =
        inv0.mat3() * mix.atom_mat(i) *
        detail::exp_mat(kind, Eigen::Vector3d(z.coords));
    const auto lc = detail::log_coords(kind, y);
    if (!lc) {
      throw OutsideChart("product of atom and smoothing draw left the chart");
    }
    lin_out = Eigen::Vector3d(shifts[i]) + Eigen::Vector3d(z.coords);
    d_out = *lc - lin_out;
  };
  // residual = E[|X|^2 - |lin|^2] - (|E X|^2 - |m_az|^2) with the means
  // expanded about the exact linear mean m_az, so every sampled quantity is
  // O(epsilon^3).
  const McMoments ev = mc_mean(n_samples, rng.fork(0), [&](RngStream& r) {
    Eigen::Vector3d d, lin;
    draw(r, d, lin);
    return d.dot(d + 2.0 * lin);
  });
  Eigen::Vector3d ed;
  Eigen::Vector3d ed_se;
  for (int c = 0; c < 3; ++c) {
    const McMoments m =
        mc_mean(n_samples, rng.fork(1 + static_cast<std::uint64_t>(c)),
                [&](RngStream& r) {
                  Eigen::Vector3d d, lin;
                  draw(r, d, lin);
                  return d[c];
                });
    ed[c] = m.mean;
    ed_se[c] = m.std_error;
  }
  const Eigen::Vector3d m3(m_az);
  rep.residual = ev.mean - 2.0 * m3.dot(ed) - ed.squaredNorm();
  double var = ev.std_error * ev.std_error;
  for (int c = 0; c < 3; ++c) {
    const double g = 2.0 * (m3[c] + ed[c]);
    var += g * g * ed_se[c] * ed_se[c];
  }
  rep.std_error = std::sqrt(var);
  rep.within_bound =
      std::abs(rep.residual) <=
      bound_constant * rep.epsilon * rep.epsilon * rep.epsilon +
          4.0 * rep.std_error;
  return rep;
}

}  // namespace liewalk
