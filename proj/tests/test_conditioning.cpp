#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "liewalk/conditioning.hpp"
#include "liewalk/entropy.hpp"
#include "liewalk/errors.hpp"
#include "liewalk/kernel.hpp"
#include "liewalk/measure.hpp"
#include "oracles.hpp"

using namespace liewalk;
using oracles::conditional_variance_quad;
using oracles::finite_entropy_quad;
using Trunc1D = oracles::TruncGauss1D;
using Mix1D = oracles::TruncMix1D;

namespace {

GroupElement pt1(const LieGroupModel& m, double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return GroupElement::from_vector(m, v);
}

GroupElement from3(const LieGroupModel& m, double x, double y, double z) {
  Eigen::VectorXd v(3);
  v << x, y, z;
  return exp_of(AlgebraVector{m, v});
}

GroupElement sl2_upper() {
  RatMat s(2, 2);
  s(0, 0) = 1;
  s(0, 1) = 2;
  s(1, 1) = 1;
  return GroupElement::from_matrix(LieGroupModel::sl2r(), s);
}

GroupElement sl2_lower() {
  RatMat t(2, 2);
  t(0, 0) = 1;
  t(1, 0) = 2;
  t(1, 1) = 1;
  return GroupElement::from_matrix(LieGroupModel::sl2r(), t);
}

bool exact_equal(const FinSuppMeasure& x, const FinSuppMeasure& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (RatMat::compare(x.atoms()[i].element.exact(),
                        y.atoms()[i].element.exact()) != 0) {
      return false;
    }
    if (x.atoms()[i].weight != y.atoms()[i].weight) return false;
  }
  return true;
}

// Quadrature value of H_a(mu; r) for a two-atom uniform law on the line.
double entropy_at_scale_quad(double d, double a, double r) {
  const Mix1D mix{{0.0, d}, {0.5, 0.5}, Trunc1D(a, r)};
  const Trunc1D f(a, r);
  const double hmix =
      finite_entropy_quad([&](double t) { return mix(t); }, mix.breaks());
  const double hker =
      finite_entropy_quad([&](double t) { return f(t); }, {-a * r, a * r});
  return hmix - hker;
}

}  // namespace

TEST_CASE("posterior over atoms given a smoothed observation") {
  const auto m = LieGroupModel::abelian(1);
  SUBCASE("single atom gets all the mass") {
    const SmoothingKernel k(m, 2.0, 0.3);
    const auto post = posterior_given_smoothed(
        FinSuppMeasure::dirac(pt1(m, 0.7)), k, pt1(m, 0.5));
    REQUIRE(post.weights.size() == 1);
    CHECK(post.weights[0] == 1.0);
  }
  SUBCASE("separated atoms give a degenerate posterior") {
    const SmoothingKernel k(m, 2.0, 0.1);
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, 1.0), Rational(1, 2)}});
    const auto post = posterior_given_smoothed(mu, k, pt1(m, 0.05));
    CHECK(post.weights[0] == 1.0);
    CHECK(post.weights[1] == 0.0);
  }
  SUBCASE("symmetric observation splits evenly") {
    const double d = 0.3;
    const SmoothingKernel k(m, 2.0, 0.2);
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, d), Rational(1, 2)}});
    const auto post = posterior_given_smoothed(mu, k, pt1(m, d / 2));
    CHECK(post.weights[0] == 0.5);
    CHECK(post.weights[1] == 0.5);
  }
  SUBCASE("observation outside every support is an error") {
    const SmoothingKernel k(m, 2.0, 0.1);
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, 1.0), Rational(1, 2)}});
    CHECK_THROWS_AS(posterior_given_smoothed(mu, k, pt1(m, 0.5)),
                    ZeroDensityObservation);
  }
  SUBCASE("weights are proportional to weighted group densities") {
    const auto sl = LieGroupModel::sl2r();
    const SmoothingKernel k(sl, 2.0, 0.08);
    const auto g1 = from3(sl, 0.05, 0.0, 0.0);
    const auto g2 = from3(sl, 0.0, 0.07, 0.0);
    const auto g3 = from3(sl, -0.04, 0.02, 0.05);
    const auto mu = FinSuppMeasure::from_atoms({{g1, Rational(1, 2)},
                                                {g2, Rational(1, 3)},
                                                {g3, Rational(1, 6)}});
    const auto y = multiply(g2, from3(sl, 0.02, -0.01, 0.03));
    const auto post = posterior_given_smoothed(mu, k, y);
    // Index through mu.atoms(): from_atoms stores atoms in canonical order.
    double total = 0.0;
    double lik[3];
    for (std::size_t i = 0; i < mu.size(); ++i) {
      lik[i] = mu.atoms()[i].weight.get_d() *
               group_density(k, mu.atoms()[i].element, y);
      total += lik[i];
    }
    double wsum = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      CHECK(post.weights[i] == doctest::Approx(lik[i] / total).epsilon(1e-12));
      wsum += post.weights[i];
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("mass only on atoms within the kernel radius") {
    const auto m2 = LieGroupModel::abelian(2);
    const SmoothingKernel k(m2, 2.0, 0.15);
    std::vector<Atom> atoms;
    RngStream rng(50, 0);
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd v(2);
      v << rng.uniform01(), rng.uniform01();
      atoms.push_back({GroupElement::from_vector(m2, v), Rational(1, 5)});
    }
    const auto mu = FinSuppMeasure::from_atoms(atoms);
    const MixtureDensity mix(mu, k);
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t i = mix.pick_atom(rng.uniform01());
      const auto z = sample_kernel(k, rng);
      const auto y = GroupElement::from_vector(
          m2, Eigen::VectorXd(mix.atom_vec(i) + z.coords));
      const auto post = posterior_given_smoothed(mu, k, y);
      for (std::size_t j = 0; j < post.weights.size(); ++j) {
        if (post.weights[j] > 0.0) {
          CHECK(distance(mu.atoms()[j].element, y).value <=
                k.radius() * (1.0 + 1e-9));
        }
      }
    }
  }
  SUBCASE("model mismatch is rejected") {
    const SmoothingKernel k(m, 2.0, 0.3);
    const auto mu = FinSuppMeasure::dirac(pt1(m, 0.0));
    CHECK_THROWS_AS(
        posterior_given_smoothed(
            mu, k, GroupElement::identity(LieGroupModel::abelian(2))),
        ModelMismatch);
  }
}

TEST_CASE("trace about an anchor") {
  SUBCASE("point mass has zero trace") {
    const auto so3 = LieGroupModel::so3();
    const auto g = from3(so3, 0.3, -0.1, 0.2);
    CHECK(trace_about(GroupElement::identity(so3),
                      FinSuppMeasure::dirac(g)) == 0.0);
    CHECK(trace_about(g, FinSuppMeasure::dirac(g)) == 0.0);
  }
  SUBCASE("two-point law on the line is a Bernoulli variance") {
    const auto m = LieGroupModel::abelian(1);
    const double d = 0.6;
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, d), Rational(1, 2)}});
    CHECK(trace_about(pt1(m, 0.0), mu) ==
          doctest::Approx(d * d / 4).epsilon(1e-14));
  }
  SUBCASE("matches the pairwise identity and an MC oracle on rotations") {
    const auto so3 = LieGroupModel::so3();
    const auto g0 = from3(so3, 0.05, 0.1, 0.0);
    const auto g1 = from3(so3, 0.3, -0.1, 0.2);
    const auto g2 = from3(so3, -0.1, 0.25, 0.1);
    const double p = 0.3;
    const auto mu = FinSuppMeasure::from_atoms(
        {{g1, Rational(3, 10)}, {g2, Rational(7, 10)}});
    const double got = trace_about(g0, mu);

    const auto x1 = log_of(multiply(inverse(g0), g1)).coords;
    const auto x2 = log_of(multiply(inverse(g0), g2)).coords;
    CHECK(got == doctest::Approx(p * (1 - p) * (x1 - x2).squaredNorm())
                     .epsilon(1e-12));

    RngStream rng(51, 0);
    const int n = 400000;
    double sum2 = 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
      const auto& x = rng.uniform01() < p ? x1 : x2;
      sum2 += x.squaredNorm();
      mean += x;
    }
    mean /= n;
    const double mc = sum2 / n - mean.squaredNorm();
    CHECK(got == doctest::Approx(mc).epsilon(0.01));
  }
  SUBCASE("names the atoms that leave the chart") {
    const auto sl = LieGroupModel::sl2r();
    const auto mu = FinSuppMeasure::from_atoms(
        {{from3(sl, 0.1, 0.0, 0.0), Rational(1, 2)},
         {sl2_upper(), Rational(1, 2)}});
    try {
      trace_about(GroupElement::identity(sl), mu);
      CHECK(false);
    } catch (const OutsideChart& e) {
      CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
  }
  SUBCASE("model mismatch is rejected") {
    const auto m = LieGroupModel::abelian(1);
    CHECK_THROWS_AS(trace_about(GroupElement::identity(LieGroupModel::so3()),
                                FinSuppMeasure::dirac(pt1(m, 0.0))),
                    ModelMismatch);
  }
}

TEST_CASE("conditional laws of independent factors convolve") {
  const auto sl = LieGroupModel::sl2r();
  const auto S = sl2_upper();
  const auto T = sl2_lower();
  const auto I = GroupElement::identity(sl);

  // Joint table over (condition, g, h) with g, h independent given the
  // condition.
  struct Branch {
    Rational prob;
    std::vector<Atom> g_atoms, h_atoms;
  };
  const std::vector<Branch> branches = {
      {Rational(1, 3),
       {{S, Rational(1, 2)}, {I, Rational(1, 2)}},
       {{T, Rational(1, 3)}, {S, Rational(2, 3)}}},
      {Rational(2, 3),
       {{T, Rational(1, 1)}},
       {{I, Rational(1, 2)}, {T, Rational(1, 2)}}},
  };

  for (const auto& b : branches) {
    // Route one: enumerate the joint then condition and read off gh.
    std::vector<Atom> joint;
    for (const auto& ga : b.g_atoms) {
      for (const auto& ha : b.h_atoms) {
        joint.push_back({multiply(ga.element, ha.element),
                         ga.weight * ha.weight});
      }
    }
    const auto law_direct = FinSuppMeasure::from_atoms(joint);
    // Route two: convolve the conditional laws.
    const auto law_conv = convolve(FinSuppMeasure::from_atoms(b.g_atoms),
                                   FinSuppMeasure::from_atoms(b.h_atoms));
    CHECK(exact_equal(law_direct, law_conv));
  }

  // Without conditioning the factors correlate through the branch, and the
  // law of gh differs from the convolution of the marginals.
  std::vector<Atom> g_marg, h_marg, gh_all;
  for (const auto& b : branches) {
    for (const auto& ga : b.g_atoms) {
      g_marg.push_back({ga.element, b.prob * ga.weight});
      for (const auto& ha : b.h_atoms) {
        gh_all.push_back({multiply(ga.element, ha.element),
                          b.prob * ga.weight * ha.weight});
      }
    }
    for (const auto& ha : b.h_atoms) {
      h_marg.push_back({ha.element, b.prob * ha.weight});
    }
  }
  const auto mixed = FinSuppMeasure::from_atoms(gh_all);
  const auto product = convolve(FinSuppMeasure::from_atoms(g_marg),
                                FinSuppMeasure::from_atoms(h_marg));
  CHECK(!exact_equal(mixed, product));
}

TEST_CASE("conditional trace") {
  const auto m = LieGroupModel::abelian(1);
  SUBCASE("zero for a point mass") {
    const SmoothingKernel k(m, 2.0, 0.2);
    const auto est = conditional_trace(FinSuppMeasure::dirac(pt1(m, 0.4)), k,
                                       20000, RngStream(52, 0));
    CHECK(std::abs(est.value) <= 1e-14);
    CHECK(est.std_error <= 1e-14);
  }
  SUBCASE("zero when the posterior is always degenerate") {
    const SmoothingKernel k(m, 2.0, 0.1);
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, 1.0), Rational(1, 2)}});
    const auto est = conditional_trace(mu, k, 20000, RngStream(53, 0));
    CHECK(std::abs(est.value) <= 1e-14);
  }
  SUBCASE("matches the quadrature oracle on the line") {
    const double r2 = 0.2, d = r2, a = 3.0;
    const SmoothingKernel k(m, a, r2);
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, d), Rational(1, 2)}});
    const auto est = conditional_trace(mu, k, 200000, RngStream(54, 0));
    const double want = conditional_variance_quad({0.0, d}, {0.5, 0.5}, a, r2);
    CHECK(std::abs(est.value - want) <= 4.0 * est.std_error);
    CHECK(est.value <= trace_about(pt1(m, 0.0), mu) + 4.0 * est.std_error);
  }
  SUBCASE("uneven weights against the oracle") {
    const SmoothingKernel k(m, 2.0, 0.15);
    const auto mu = FinSuppMeasure::from_atoms({{pt1(m, 0.0), Rational(1, 5)},
                                                {pt1(m, 0.1), Rational(3, 5)},
                                                {pt1(m, 0.35), Rational(1, 5)}});
    const auto est = conditional_trace(mu, k, 200000, RngStream(55, 0));
    const double want = conditional_variance_quad({0.0, 0.1, 0.35},
                                                  {0.2, 0.6, 0.2}, 2.0, 0.15);
    CHECK(std::abs(est.value - want) <= 4.0 * est.std_error);
  }
  SUBCASE("bounded by the unconditional trace on a matrix model") {
    const auto sl = LieGroupModel::sl2r();
    const SmoothingKernel k(sl, 2.0, 0.05);
    const auto g1 = from3(sl, 0.04, 0.0, 0.01);
    const auto g2 = from3(sl, -0.03, 0.06, 0.0);
    const auto mu = FinSuppMeasure::from_atoms(
        {{g1, Rational(1, 2)}, {g2, Rational(1, 2)}});
    const auto est = conditional_trace(mu, k, 100000, RngStream(56, 0));
    // The posterior anchors at the observation rather than at g1, which
    // perturbs the comparison by a cubic in the overall extent.
    const double eps = 0.2;
    CHECK(est.value <=
          trace_about(g1, mu) + 4.0 * est.std_error + eps * eps * eps);
  }
}

TEST_CASE("conditional entropy given a coarser smoothing") {
  const auto m = LieGroupModel::abelian(1);
  SUBCASE("point mass reduces to the fine kernel entropy") {
    const SmoothingKernel k1(m, 2.0, 0.05);
    const SmoothingKernel k2(m, 2.0, 0.2);
    const auto est = conditional_entropy_given_smoothed(
        FinSuppMeasure::dirac(pt1(m, 0.0)), k1, k2, 4000, RngStream(57, 0));
    CHECK(std::abs(est.value - kernel_entropy(k1).quadrature_value) <=
          4.0 * est.std_error);
  }
  SUBCASE("separated atoms reduce to the fine kernel entropy") {
    const SmoothingKernel k1(m, 2.0, 0.05);
    const SmoothingKernel k2(m, 2.0, 0.1);
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, 2.0), Rational(1, 2)}});
    const auto est =
        conditional_entropy_given_smoothed(mu, k1, k2, 4000, RngStream(58, 0));
    CHECK(std::abs(est.value - kernel_entropy(k1).quadrature_value) <=
          4.0 * est.std_error);
  }
  SUBCASE("dominates entropy between scales plus the kernel entropy") {
    const double a = 2.0, r1 = 0.05, r2 = 0.1, d = 0.15;
    const SmoothingKernel k1(m, a, r1);
    const SmoothingKernel k2(m, a, r2);
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, d), Rational(1, 2)}});
    const auto est =
        conditional_entropy_given_smoothed(mu, k1, k2, 6000, RngStream(59, 0));
    const double between =
        entropy_at_scale_quad(d, a, r1) - entropy_at_scale_quad(d, a, r2);
    const double h1 = finite_entropy_quad(
        [&](double t) { return Trunc1D(a, r1)(t); }, {-a * r1, a * r1});
    CHECK(est.value >= between + h1 - 4.0 * est.std_error);
  }
}

TEST_CASE("trace witness at scale") {
  const auto m = LieGroupModel::abelian(1);
  SUBCASE("point mass certifies zero") {
    const auto w = trace_at_scale_witness(FinSuppMeasure::dirac(pt1(m, 0.0)),
                                          2.0, 0.1, 5000, RngStream(60, 0));
    CHECK(w.t <= 1e-12);
    CHECK(w.radius == 0.4);
    CHECK(!w.scheme.empty());
    const auto j = to_json(w);
    CHECK(j.find("\"t\"") != std::string::npos);
    CHECK(j.find("\"radius\"") != std::string::npos);
    CHECK(j.find("\"scheme\"") != std::string::npos);
    CHECK(j.find("\"std_error\"") != std::string::npos);
  }
  SUBCASE("matches the conditional trace at doubled scale") {
    const double a = 3.0, r = 0.05;
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, 3 * r), Rational(1, 2)}});
    const auto w = trace_at_scale_witness(mu, a, r, 150000, RngStream(61, 0));
    CHECK(w.t > 0.0);
    const double radius2 = w.radius * w.radius;
    const double want =
        conditional_variance_quad({0.0, 3 * r}, {0.5, 0.5}, a, 2 * r);
    CHECK(std::abs(w.t * radius2 - want) <= 4.0 * w.std_error * radius2);

    const SmoothingKernel k2(m, a, 2 * r);
    const auto ct = conditional_trace(mu, k2, 150000, RngStream(61, 0));
    CHECK(w.t * radius2 == doctest::Approx(ct.value).epsilon(1e-12));
    CHECK(w.t * radius2 <= ct.value + 4.0 * ct.std_error);
  }
  SUBCASE("witness certifies a positive share of the entropy drop") {
    const double a = 3.0, r = 0.001;
    double c_min = std::numeric_limits<double>::infinity();
    int informative = 0;
    std::uint64_t stream = 0;
    for (const double dmul : {2.0, 3.0, 4.0}) {
      const double d = dmul * r;
      const auto mu = FinSuppMeasure::from_atoms(
          {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, d), Rational(1, 2)}});
      const auto w =
          trace_at_scale_witness(mu, a, r, 40000, RngStream(62, stream++));
      const double gap = entropy_at_scale_quad(d, a, r) -
                         entropy_at_scale_quad(d, a, 2 * r);
      const double rhs =
          (gap - std::exp(-a * a / 4) - a * a * a * r) / (a * a);
      if (rhs > 0.0) {
        ++informative;
        CHECK(w.t > 0.0);
        c_min = std::min(c_min, w.t / rhs);
      }
    }
    REQUIRE(informative > 0);
    CHECK(c_min > 0.0);
  }
}

TEST_CASE("trace of a product against the sum of traces") {
  SUBCASE("identically zero on the line") {
    const auto m = LieGroupModel::abelian(1);
    const SmoothingKernel k(m, 2.0, 0.05);
    const auto mu = FinSuppMeasure::from_atoms(
        {{pt1(m, 0.0), Rational(1, 2)}, {pt1(m, 0.08), Rational(1, 2)}});
    const auto rep = trace_product_check(mu, k, 1000, RngStream(63, 0));
    CHECK(rep.residual == 0.0);
    CHECK(rep.std_error == 0.0);
    CHECK(rep.within_bound);
    CHECK(rep.epsilon == doctest::Approx(0.1).epsilon(1e-14));
  }
  SUBCASE("cubic-order residual on sl2r with four-fold decay") {
    const auto sl = LieGroupModel::sl2r();
    auto scaled_case = [&](double scale) {
      const auto g1 = from3(sl, 0.0, 0.0, 0.0);
      const auto g2 = from3(sl, 0.6 * scale, -0.4 * scale, 0.5 * scale);
      const auto g3 = from3(sl, -0.3 * scale, 0.5 * scale, -0.2 * scale);
      const auto mu = FinSuppMeasure::from_atoms({{g1, Rational(1, 3)},
                                                  {g2, Rational(1, 3)},
                                                  {g3, Rational(1, 3)}});
      const SmoothingKernel k(sl, 2.0, 0.005 * (scale / 0.01));
      return trace_product_check(mu, k, 100000, RngStream(64, 0));
    };
    const auto full = scaled_case(0.01);
    CHECK(full.within_bound);
    CHECK(std::abs(full.residual) <=
          full.bound_constant * 1e-6 + 4.0 * full.std_error);
    const auto half = scaled_case(0.005);
    CHECK(half.within_bound);
    CHECK(std::abs(half.residual) <=
          std::abs(full.residual) / 4.0 + 4.0 * (half.std_error +
                                                 full.std_error / 4.0));
  }
  SUBCASE("nilpotent model stays within the bound") {
    const auto h3 = LieGroupModel::heisenberg3();
    const auto mu = FinSuppMeasure::from_atoms(
        {{from3(h3, 0.02, 0.01, 0.0), Rational(1, 2)},
         {from3(h3, -0.01, 0.02, 0.01), Rational(1, 2)}});
    const SmoothingKernel k(h3, 2.0, 0.02);
    const auto rep = trace_product_check(mu, k, 50000, RngStream(65, 0));
    CHECK(rep.within_bound);
  }
  SUBCASE("atoms outside the anchor chart are an error") {
    const auto sl = LieGroupModel::sl2r();
    const auto mu = FinSuppMeasure::from_atoms(
        {{from3(sl, 0.3, 0.0, 0.0), Rational(1, 2)},
         {from3(sl, -0.3, 0.0, 0.0), Rational(1, 2)}});
    const SmoothingKernel k(sl, 2.0, 0.01);
    CHECK_THROWS_AS(trace_product_check(mu, k, 1000, RngStream(66, 0)),
                    OutsideChart);
  }
}

TEST_CASE("entropy is controlled by the trace for concentrated laws") {
  SUBCASE("exact quadrature route on flat models") {
    for (int l : {1, 2, 3}) {
      const auto m = LieGroupModel::abelian(l);
      for (const double a : {2.0, 4.0}) {
        for (const double r : {0.05, 0.3}) {
          const SmoothingKernel k(m, a, r);
          const double h = kernel_entropy(k).quadrature_value;
          const double tr = kernel_trace(k);
          CHECK(h <= 0.5 * l * std::log(2.0 * M_PI * M_E * tr / l) + 1e-12);
        }
      }
    }
  }
  SUBCASE("curved models allow a distortion charge linear in the radius") {
    for (const auto& model :
         {LieGroupModel::sl2r(), LieGroupModel::so3()}) {
      const SmoothingKernel k(model, 2.0, 0.06);
      const auto est = pushforward_entropy(k, 100000, RngStream(67, 0));
      const double tr = kernel_trace(k);
      const double eps = k.radius();
      const double bound =
          0.5 * 3.0 * std::log(2.0 * M_PI * M_E * tr / 3.0) + 1.0 * eps;
      CHECK(est.value <= bound + 4.0 * est.std_error);
    }
  }
}
