#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "liewalk/errors.hpp"
#include "liewalk/kernel.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/scales.hpp"
#include "oracles.hpp"

using namespace liewalk;
using oracles::conditional_variance_quad;

namespace {

GroupElement pt1(const LieGroupModel& m, double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return GroupElement::from_vector(m, v);
}

FinSuppMeasure two_atoms(double d) {
  const LieGroupModel m = LieGroupModel::abelian(1);
  return FinSuppMeasure::from_atoms(
      {{pt1(m, 0.0), 0.5}, {pt1(m, d), 0.5}});
}

TraceProfile synthetic(double u_lo, double u_hi, std::size_t k,
                       const std::function<double(double)>& f) {
  TraceProfile p;
  p.a = 0.0;
  p.source = "synthetic";
  const double step = std::log(u_hi / u_lo) / double(k - 1);
  for (std::size_t j = 0; j < k; ++j) {
    double u = u_lo * std::exp(double(j) * step);
    if (j == 0) u = u_lo;
    if (j + 1 == k) u = u_hi;
    p.points.push_back({u, f(u), 0.0});
  }
  return p;
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

void check_selection_shape(const ScaleSelection& s, const TraceProfile& p) {
  REQUIRE(s.scales.size() == s.m);
  REQUIRE(s.values.size() == s.m);
  const double u_lo = p.points.front().u;
  const double u_hi = p.points.back().u;
  const double span = std::log(u_hi) - std::log(u_lo);
  CHECK(s.m == std::size_t(std::ceil(span / (2.0 * std::log(s.A)))));
  for (std::size_t i = 0; i < s.m; ++i) {
    CHECK(s.scales[i] >= u_lo);
    CHECK(s.scales[i] <= u_hi);
    if (i + 1 < s.m) CHECK(!(s.A * s.scales[i] > s.scales[i + 1]));
  }
}

}  // namespace

TEST_CASE("trace profile on a geometric grid") {
  SUBCASE("point mass gives the all-zero profile") {
    const FinSuppMeasure mu =
        FinSuppMeasure::dirac(pt1(LieGroupModel::abelian(1), 0.3));
    const TraceProfile p =
        trace_profile(mu, 2.0, 0.01, 0.1, 8, 500, RngStream(80, 0));
    REQUIRE(p.points.size() == 8);
    CHECK(p.a == 2.0);
    CHECK(p.source.find("model=") != std::string::npos);
    CHECK(p.points.front().u == doctest::Approx(2.0 * 2.0 * 0.01));
    CHECK(p.points.back().u == doctest::Approx(2.0 * 2.0 * 0.1));
    for (std::size_t j = 0; j < p.points.size(); ++j) {
      CHECK(p.points[j].value >= 0.0);
      CHECK(p.points[j].value <= 1e-12);
      CHECK(p.points[j].std_error <= 1e-12);
      if (j > 0) CHECK(p.points[j - 1].u < p.points[j].u);
    }
  }

  SUBCASE("two separated atoms match the per-scale quadrature oracle") {
    const double d = 0.1;
    const FinSuppMeasure mu = two_atoms(d);
    const TraceProfile p =
        trace_profile(mu, 2.0, 0.004, 0.12, 10, 20000, RngStream(81, 0));
    double peak = 0.0;
    double peak_u = 0.0;
    for (const TracePoint& q : p.points) {
      const double oracle =
          conditional_variance_quad({0.0, d}, {0.5, 0.5}, 2.0, q.u / 2.0) /
          (q.u * q.u);
      CHECK(std::abs(q.value - oracle) <= 5.0 * q.std_error + 1e-9);
      if (q.value > peak) {
        peak = q.value;
        peak_u = q.u;
      }
    }
    CHECK(peak > 0.0);
    CHECK(peak_u >= d / 3.0);
    CHECK(peak_u <= 3.0 * d);
    CHECK(p.points.front().value < peak);
    CHECK(p.points.back().value < peak);
  }

  SUBCASE("standard error scales as one over root sample count") {
    const FinSuppMeasure mu = two_atoms(0.1);
    const auto avg_se = [&](std::size_t n) {
      const TraceProfile p =
          trace_profile(mu, 2.0, 0.02, 0.15, 8, n, RngStream(82, 0));
      double s = 0.0;
      for (const TracePoint& q : p.points) s += q.std_error;
      return s / double(p.points.size());
    };
    const double s1 = avg_se(4000);
    const double s2 = avg_se(8000);
    const double s4 = avg_se(16000);
    CHECK(s1 / s2 > std::sqrt(2.0) * 0.8);
    CHECK(s1 / s2 < std::sqrt(2.0) * 1.2);
    CHECK(s1 / s4 > 2.0 * 0.8);
    CHECK(s1 / s4 < 2.0 * 1.2);
  }

  SUBCASE("deterministic in the stream, not the call site") {
    const FinSuppMeasure mu = two_atoms(0.08);
    const TraceProfile p1 =
        trace_profile(mu, 2.0, 0.01, 0.08, 8, 2000, RngStream(83, 5));
    const TraceProfile p2 =
        trace_profile(mu, 2.0, 0.01, 0.08, 8, 2000, RngStream(83, 5));
    REQUIRE(p1.points.size() == p2.points.size());
    for (std::size_t j = 0; j < p1.points.size(); ++j) {
      CHECK(p1.points[j].value == p2.points[j].value);
      CHECK(p1.points[j].std_error == p2.points[j].std_error);
    }
  }

  SUBCASE("rejects bad grids and scales outside the chart") {
    const FinSuppMeasure mu = two_atoms(0.1);
    CHECK_THROWS_AS(trace_profile(mu, 2.0, 0.01, 0.1, 7, 10, RngStream(1)),
                    ConfigError);
    CHECK_THROWS_AS(trace_profile(mu, 2.0, 0.0, 0.1, 8, 10, RngStream(1)),
                    ConfigError);
    CHECK_THROWS_AS(trace_profile(mu, 2.0, 0.1, 0.1, 8, 10, RngStream(1)),
                    ConfigError);
    const FinSuppMeasure nu = FinSuppMeasure::dirac(sl2_upper());
    CHECK_THROWS_AS(trace_profile(nu, 2.0, 0.01, 0.2, 8, 10, RngStream(1)),
                    ConfigError);
  }

  SUBCASE("csv round trip") {
    const FinSuppMeasure mu =
        FinSuppMeasure::dirac(pt1(LieGroupModel::abelian(1), 0.0));
    const TraceProfile p =
        trace_profile(mu, 2.0, 0.01, 0.1, 8, 200, RngStream(84, 0));
    const std::string csv = profile_to_csv(p);
    CHECK(csv.rfind("u,value,std_error\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  }
}

TEST_CASE("log integral of a trace profile") {
  SUBCASE("constant profile integrates to the constant times the log span") {
    const TraceProfile p =
        synthetic(0.2, 0.2 * std::exp(1.0), 9, [](double) { return 0.7; });
    CHECK(log_integral(p) == doctest::Approx(0.7).epsilon(1e-12));
  }

  SUBCASE("zero profile integrates to zero") {
    const TraceProfile p = synthetic(0.1, 1.0, 8, [](double) { return 0.0; });
    CHECK(log_integral(p) == 0.0);
  }

  SUBCASE("grid refinement moves the value by under two percent") {
    const auto bump = [](double u) {
      const double t = std::log(u);
      return std::exp(-t * t);
    };
    const TraceProfile coarse = synthetic(0.05, 20.0, 64, bump);
    const TraceProfile fine = synthetic(0.05, 20.0, 256, bump);
    const double ic = log_integral(coarse);
    const double if_ = log_integral(fine);
    CHECK(std::abs(ic - if_) <= 0.02 * if_);
  }

  SUBCASE("monotone under pointwise domination") {
    const auto bump = [](double u) {
      const double t = std::log(u);
      return std::exp(-t * t);
    };
    const TraceProfile p = synthetic(0.1, 10.0, 32, bump);
    const TraceProfile q =
        synthetic(0.1, 10.0, 32, [&](double u) { return bump(u) + 0.1; });
    CHECK(log_integral(q) > log_integral(p));
  }

  SUBCASE("needs two points") {
    TraceProfile p;
    p.points.push_back({1.0, 1.0, 0.0});
    CHECK_THROWS_AS(log_integral(p), ConfigError);
  }
}

TEST_CASE("scale selection from a trace profile") {
  SUBCASE("constant profile keeps at least the guaranteed share") {
    const double A = 1.5;
    const double c = 0.3;
    const TraceProfile p = synthetic(1.0, std::pow(A, 4.0), 33,
                                     [&](double) { return c; });
    const ScaleSelection sel = select_scales(p, A);
    check_selection_shape(sel, p);
    CHECK(sel.m == 2);
    CHECK(sel.trace_sum >= c - 1e-9);
    CHECK(sel.trace_sum >=
          log_integral(p) / (4.0 * std::log(A)) - 1e-12);
    CHECK(sel.slack == 0.0);
  }

  SUBCASE("a single spike is always collected") {
    const double A = 1.5;
    const std::size_t k = 33;
    const double u_hi = std::pow(A, 4.0);
    const double step = std::log(u_hi) / double(k - 1);
    const double spike_u = std::exp(4.0 * step);
    REQUIRE(spike_u > 1.05);
    REQUIRE(spike_u < 1.45);
    const TraceProfile p = synthetic(1.0, u_hi, k, [&](double u) {
      return std::abs(std::log(u) - std::log(spike_u)) < 0.5 * step ? 5.0
                                                                    : 0.0;
    });
    const ScaleSelection sel = select_scales(p, A);
    check_selection_shape(sel, p);
    CHECK(sel.branch == Branch::U);
    CHECK(sel.trace_sum == 5.0);
    CHECK(sel.scales.front() == doctest::Approx(spike_u));
    CHECK(sel.restricted_integral > 0.0);
  }

  SUBCASE("zero profile yields a valid empty-handed selection") {
    const TraceProfile p =
        synthetic(0.01, 1.0, 16, [](double) { return 0.0; });
    const ScaleSelection sel = select_scales(p, 1.8);
    check_selection_shape(sel, p);
    CHECK(sel.trace_sum == 0.0);
    CHECK(sel.restricted_integral == 0.0);
    CHECK(sel.slack == 0.0);
  }

  SUBCASE("smooth bump keeps the guaranteed share with zero slack") {
    const auto bump = [](double u) {
      const double t = std::log(u) - std::log(0.5);
      return 2.0 * std::exp(-t * t);
    };
    const TraceProfile p = synthetic(0.02, 12.5, 65, bump);
    for (const double A : {1.3, 1.7, 2.4}) {
      const ScaleSelection sel = select_scales(p, A);
      check_selection_shape(sel, p);
      CHECK(sel.trace_sum >=
            log_integral(p) / (4.0 * std::log(A)) - 1e-12);
      CHECK(sel.slack == 0.0);
    }
  }

  SUBCASE("narrow intervals fall back to interpolation everywhere") {
    const double A = 1.02;
    const TraceProfile p =
        synthetic(1.0, 40.0, 8, [](double) { return 1.0; });
    const ScaleSelection sel = select_scales(p, A);
    check_selection_shape(sel, p);
    for (double v : sel.values) CHECK(v == 1.0);
    CHECK(sel.trace_sum == double(sel.m));
    CHECK(sel.trace_sum >= log_integral(p) / (4.0 * std::log(A)) - 1e-9);
  }

  SUBCASE("span must exceed one interval pair") {
    const TraceProfile p = synthetic(1.0, 2.0, 8, [](double) { return 1.0; });
    CHECK_THROWS_AS(select_scales(p, 1.5), RangeTooNarrow);
    CHECK_THROWS_AS(select_scales(p, 1.0), ConfigError);
  }

  SUBCASE("selection serializes to json") {
    const TraceProfile p =
        synthetic(1.0, 30.0, 16, [](double u) { return 1.0 / u; });
    const ScaleSelection sel = select_scales(p, 1.6);
    const nlohmann::json j = nlohmann::json::parse(to_json(sel));
    CHECK(j["m"].get<std::size_t>() == sel.m);
    CHECK(j["A"].get<double>() == sel.A);
    CHECK(j["trace_sum"].get<double>() == sel.trace_sum);
    CHECK(j["scales"].size() == sel.m);
    const std::string b = j["branch"].get<std::string>();
    CHECK((b == "U" || b == "V"));
  }
}

TEST_CASE("entropy gap to trace sum pipeline") {
  SUBCASE("two separated atoms produce a positive gap and positive trace") {
    const double d = 0.08;
    const FinSuppMeasure mu = two_atoms(d);
    const double a = 2.0;
    const double r1 = d / 8.0;
    const double r2 = d / 1.5;
    const GapTraceReport rep = entropy_gap_to_trace_sum(
        mu, a, r1, r2, 1.7, 30000, RngStream(90, 0), 0.0, 1.0, 16);

    REQUIRE(rep.probes_r1.size() == 4);
    REQUIRE(rep.probes_r2.size() == 4);
    CHECK(rep.probes_r1.front() == doctest::Approx(r1));
    CHECK(rep.probes_r1.back() == doctest::Approx(2.0 * r1));
    CHECK(rep.probes_r2.front() == doctest::Approx(0.5 * r2));
    CHECK(rep.probes_r2.back() == doctest::Approx(2.0 * r2));

    // Quadrature value of the same min-minus-max probe statistic.
    const auto h_quad = [&](double r) {
      const oracles::TruncGauss1D f(a, r);
      const oracles::TruncMix1D mix{{0.0, d}, {0.5, 0.5}, f};
      return oracles::finite_entropy_quad([&](double t) { return mix(t); },
                                          mix.breaks()) -
             oracles::finite_entropy_quad([&](double t) { return f(t); },
                                          {-a * r, a * r});
    };
    double fine = h_quad(rep.probes_r1[0]);
    for (double r : rep.probes_r1) fine = std::min(fine, h_quad(r));
    double coarse = h_quad(rep.probes_r2[0]);
    for (double r : rep.probes_r2) coarse = std::max(coarse, h_quad(r));
    const double c_quad = fine - coarse;
    CHECK(c_quad > 0.0);
    CHECK(std::abs(rep.C - c_quad) <= 6.0 * rep.C_std_error + 1e-4);

    check_selection_shape(rep.selection, rep.profile);
    CHECK(rep.selection.trace_sum > 0.0);
    CHECK(rep.profile.points.front().u == doctest::Approx(a * r1));
    CHECK(rep.profile.points.back().u == doctest::Approx(4.0 * a * r2));

    const int n_expect = std::max(
        0, int(std::ceil((std::log(r2) - std::log(r1)) / std::log(2.0))) - 1);
    CHECK(rep.N == n_expect);
    const double defect =
        double(rep.N) * (std::exp(-a * a / 4.0) + a * a * a * r2);
    CHECK(rep.predicted_bound ==
          doctest::Approx((rep.C - defect) / (a * a * std::log(1.7))));
  }

  SUBCASE("point mass fails any strictly positive gap requirement") {
    const FinSuppMeasure mu =
        FinSuppMeasure::dirac(pt1(LieGroupModel::abelian(1), 0.0));
    CHECK_THROWS_AS(
        entropy_gap_to_trace_sum(mu, 2.0, 0.01, 0.05, 1.5, 4000,
                                 RngStream(91, 0), 0.1),
        HypothesisFailed);
    const GapTraceReport rep = entropy_gap_to_trace_sum(
        mu, 2.0, 0.01, 0.05, 1.5, 4000, RngStream(91, 0), 0.0, 1.0, 8);
    CHECK(std::abs(rep.C) <= 6.0 * rep.C_std_error + 1e-6);
    CHECK(rep.selection.trace_sum <= 1e-12);
    CHECK(log_integral(rep.profile) <= 1e-12);
  }

  SUBCASE("free generators below the separation scale carry no trace") {
    const FinSuppMeasure base = FinSuppMeasure::from_atoms(
        {{sl2_upper(), 0.5}, {sl2_lower(), 0.5}});
    const FinSuppMeasure q6 = convolution_power(base, 6);
    REQUIRE(q6.atoms().size() == 64);
    const GapTraceReport rep = entropy_gap_to_trace_sum(
        q6, 2.0, 0.005, 0.02, 1.6, 2000, RngStream(92, 0), 0.0, 1.0, 8);
    CHECK(std::abs(rep.C) <= 8.0 * rep.C_std_error + 0.02);
    CHECK(rep.selection.trace_sum <= 1e-12);
    check_selection_shape(rep.selection, rep.profile);
  }

  SUBCASE("rejects a degenerate scale band") {
    const FinSuppMeasure mu = two_atoms(0.1);
    CHECK_THROWS_AS(entropy_gap_to_trace_sum(mu, 2.0, 0.05, 0.05, 1.5, 100,
                                             RngStream(1)),
                    ConfigError);
    CHECK_THROWS_AS(entropy_gap_to_trace_sum(mu, 2.0, 0.01, 0.05, 1.0, 100,
                                             RngStream(1)),
                    ConfigError);
  }
}
