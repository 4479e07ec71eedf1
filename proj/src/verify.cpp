#include "liewalk/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "liewalk/conditioning.hpp"
#include "liewalk/entropy.hpp"
#include "liewalk/errors.hpp"
#include "liewalk/kernel.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/scales.hpp"
#include "liewalk/walks.hpp"

namespace liewalk {

namespace {

FinSuppMeasure free_pair() {
  RatMat u(2, 2), l(2, 2);
  u(0, 0) = 1; u(0, 1) = 2; u(1, 1) = 1;
  l(0, 0) = 1; l(1, 0) = 2; l(1, 1) = 1;
  const LieGroupModel m = LieGroupModel::sl2r();
  return FinSuppMeasure::from_atoms(
      {{GroupElement::from_matrix(m, u), Rational(1, 2)},
       {GroupElement::from_matrix(m, l), Rational(1, 2)}});
}

GroupElement line_point(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return GroupElement::from_vector(LieGroupModel::abelian(1), v);
}

std::string fmt(const char* f, double x, double y = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, x, y);
  return buf;
}

void add(VerifyReport& rep, const std::string& name, bool pass, double margin,
         std::string detail) {
  rep.checks.push_back({name, pass, margin, std::move(detail)});
}

}  // namespace

VerifyReport run_verify_battery(const ExperimentConfig& cfg) {
  if (!(cfg.verify.tolerance > 0.0)) {
    throw ConfigError("verify.tolerance must be positive");
  }
  const double tol = cfg.verify.tolerance;
  const std::size_t n_mc = cfg.n_samples;
  VerifyReport rep;

  {
    const LieGroupModel model = config_model(cfg);
    const FinSuppMeasure mu = config_measure(cfg);
    for (double r : cfg.scales) {
      SmoothingKernel probe(model, cfg.a, r);
      (void)probe;
    }
    add(rep, "config_kernel_feasible", true, 0.0,
        "model " + model.name() + " accepted with " +
            std::to_string(mu.size()) + " atoms and " +
            std::to_string(cfg.scales.size()) + " kernel scales");
  }

  {
    double worst = 0.0;
    for (int l = 1; l <= 3; ++l) {
      const LieGroupModel m = LieGroupModel::abelian(l);
      for (double a : {2.0, 4.0}) {
        const double h1 =
            kernel_entropy(SmoothingKernel(m, a, 0.01)).quadrature_value;
        const double h2 =
            kernel_entropy(SmoothingKernel(m, a, 1.0)).quadrature_value;
        worst = std::max(worst,
                         std::abs((h1 - h2) - l * std::log(0.01 / 1.0)));
      }
    }
    add(rep, "kernel_entropy_log_scaling", worst <= 1e-8, 1e-8 - worst,
        fmt("max deviation from the l*log(r/r') identity: %.3g", worst));
  }

  {
    double min_drop = 1e300;
    double last_res6 = 0.0;
    bool decreasing = true;
    for (int l = 1; l <= 3; ++l) {
      const LieGroupModel m = LieGroupModel::abelian(l);
      double prev = 1e300;
      for (double a : {2.0, 3.0, 4.0, 6.0}) {
        const KernelEntropy ke = kernel_entropy(SmoothingKernel(m, a, 1.0));
        const double res = std::abs(ke.quadrature_value - ke.formula_value);
        if (res >= prev) decreasing = false;
        if (prev < 1e299) min_drop = std::min(min_drop, prev - res);
        prev = res;
      }
      last_res6 = std::max(last_res6, prev);
    }
    const bool pass = decreasing && last_res6 <= 1e-5;
    add(rep, "kernel_entropy_gaussian_limit", pass,
        std::min(1e-5 - last_res6, min_drop),
        fmt("residual at a=6: %.3g, smallest drop along a: %.3g", last_res6,
            min_drop));
  }

  {
    double min_slack = 1e300;
    bool positive = true;
    for (int l = 1; l <= 3; ++l) {
      const LieGroupModel m = LieGroupModel::abelian(l);
      for (double a : {2.0, 6.0}) {
        for (double r : {0.01, 1.0}) {
          const double tr = kernel_trace(SmoothingKernel(m, a, r));
          positive = positive && tr > 0.0;
          min_slack = std::min(min_slack, l * r * r - tr);
        }
      }
    }
    add(rep, "kernel_trace_bounds", positive && min_slack >= 0.0, min_slack,
        fmt("smallest slack below l*r^2: %.3g", min_slack));
  }

  {
    double min_gap = 1e300;
    for (int l = 1; l <= 3; ++l) {
      const LieGroupModel m = LieGroupModel::abelian(l);
      for (double a : {2.0, 6.0}) {
        for (double r : {0.01, 1.0}) {
          const SmoothingKernel k(m, a, r);
          const double h = kernel_entropy(k).quadrature_value;
          const double cap =
              0.5 * l *
              std::log(2.0 * M_PI * M_E / l * kernel_trace(k));
          min_gap = std::min(min_gap, cap - h);
        }
      }
    }
    add(rep, "kernel_max_entropy", min_gap >= 0.0, min_gap,
        fmt("smallest max-entropy gap: %.3g", min_gap));
  }

  const FinSuppMeasure sanov = free_pair();

  {
    double worst = 0.0;
    FinSuppMeasure power = FinSuppMeasure::dirac(
        GroupElement::identity(LieGroupModel::sl2r()));
    for (int k = 1; k <= 6; ++k) {
      power = convolve(power, sanov);
      worst = std::max(worst,
                       std::abs(shannon_entropy(power) - k * std::log(2.0)));
    }
    add(rep, "free_walk_entropy_exact", worst <= 1e-12, 1e-12 - worst,
        fmt("max |H - k log 2| over k <= 6: %.3g", worst));
  }

  {
    const FinSuppMeasure mu = FinSuppMeasure::from_atoms(
        {{line_point(0.0), Rational(1, 2)}, {line_point(1.0), Rational(1, 2)}});
    double worst = 0.0;
    for (int k = 1; k <= 10; ++k) {
      double direct = 0.0;
      double binom = 1.0;
      const double scale = std::ldexp(1.0, -k);
      for (int i = 0; i <= k; ++i) {
        const double p = binom * scale;
        direct -= p * std::log(p);
        binom = binom * (k - i) / (i + 1);
      }
      worst = std::max(
          worst, std::abs(shannon_entropy(convolution_power(mu, k)) - direct));
    }
    add(rep, "binomial_walk_entropy", worst <= 1e-12, 1e-12 - worst,
        fmt("max deviation from the direct binomial sum: %.3g", worst));
  }

  {
    bool ok = true;
    double rate_dev = 0.0;
    for (int n = 1; n <= 4; ++n) {
      const SeparationReport sep = separation_rate(sanov, n);
      ok = ok && sep.min_distance.bound() == 0.5 &&
           sep.min_distance.at_least && sep.rate_is_upper_bound;
      if (n == 1 && sep.rate) {
        rate_dev = std::abs(*sep.rate - std::log(2.0));
      }
    }
    ok = ok && rate_dev <= 1e-15;
    add(rep, "separation_rate_free_pair", ok, 1e-15 - rate_dev,
        fmt("rate at n=1 deviates from log 2 by %.3g", rate_dev));
  }

  {
    const LieGroupModel m = LieGroupModel::sl2r();
    const FinSuppMeasure delta = FinSuppMeasure::dirac(GroupElement::identity(m));
    const EntropyEstimate est = entropy_at_scale(
        delta, SmoothingKernel(m, 2.0, 0.01), n_mc, RngStream(cfg.seed, 11));
    const double slack = tol * est.std_error + est.bias_budget;
    add(rep, "entropy_at_scale_identity_null",
        std::abs(est.value) <= slack, slack - std::abs(est.value),
        fmt("|H| = %.3g with allowance %.3g", std::abs(est.value), slack));
  }

  {
    const FinSuppMeasure q3 = convolution_power(sanov, 3);
    const EntropyEstimate est =
        entropy_at_scale(q3, SmoothingKernel(LieGroupModel::sl2r(), 2.0, 0.01),
                         n_mc, RngStream(cfg.seed, 12));
    const double dev = std::abs(est.value - 3.0 * std::log(2.0));
    const double slack = tol * est.std_error + est.bias_budget;
    add(rep, "entropy_at_scale_exact_split", dev <= slack, slack - dev,
        fmt("|H - 3 log 2| = %.3g with allowance %.3g", dev, slack));
  }

  {
    const SmoothingKernel k(LieGroupModel::abelian(1), 3.0, 0.5);
    RngStream rng(cfg.seed, 13);
    std::vector<AlgebraVector> samples;
    samples.reserve(4000);
    for (int i = 0; i < 4000; ++i) samples.push_back(sample_kernel(k, rng));
    const double knn = knn_entropy_oracle(samples);
    const double quad = kernel_entropy(k).quadrature_value;
    const double dev = std::abs(knn - quad);
    add(rep, "kernel_sampler_entropy_crosscheck", dev <= 0.08, 0.08 - dev,
        fmt("nearest-neighbor estimate deviates from quadrature by %.3g",
            dev));
  }

  {
    const FinSuppMeasure mu = FinSuppMeasure::from_atoms(
        {{line_point(0.0), Rational(1, 2)}, {line_point(0.1), Rational(1, 2)}});
    const TraceWitness w =
        trace_at_scale_witness(mu, 2.0, 0.1 / 6.0, n_mc, RngStream(cfg.seed, 14));
    const double margin = w.t - tol * w.std_error;
    add(rep, "witness_trace_positive", margin > 0.0, margin,
        fmt("certified t = %.3g with std error %.3g", w.t, w.std_error));
  }

  {
    const FinSuppMeasure delta = FinSuppMeasure::dirac(line_point(0.0));
    const TraceWitness w =
        trace_at_scale_witness(delta, 2.0, 0.02, n_mc, RngStream(cfg.seed, 15));
    const double slack = 1e-12 + tol * w.std_error;
    add(rep, "witness_null_at_point_mass", w.t <= slack, slack - w.t,
        fmt("point-mass witness t = %.3g", w.t));
  }

  {
    const LieGroupModel sl = LieGroupModel::sl2r();
    auto near_identity = [&](double x, double y, double z) {
      Eigen::VectorXd v(3);
      v << x, y, z;
      return exp_of(AlgebraVector{sl, v});
    };
    const FinSuppMeasure tight = FinSuppMeasure::from_atoms(
        {{near_identity(0.0, 0.0, 0.0), Rational(1, 3)},
         {near_identity(0.012, -0.008, 0.01), Rational(1, 3)},
         {near_identity(-0.006, 0.01, -0.004), Rational(1, 3)}});
    const TraceProductReport tp =
        trace_product_check(tight, SmoothingKernel(sl, 2.0, 0.01), n_mc,
                            RngStream(cfg.seed, 16));
    const double allowance =
        tp.bound_constant * tp.epsilon * tp.epsilon * tp.epsilon +
        4.0 * tp.std_error;
    add(rep, "trace_product_residual", tp.within_bound,
        allowance - std::abs(tp.residual),
        fmt("residual %.3g against allowance %.3g", std::abs(tp.residual),
            allowance));
  }

  {
    TraceProfile profile;
    profile.a = 2.0;
    profile.source = "synthetic constant";
    const std::size_t K = 33;
    for (std::size_t j = 0; j < K; ++j) {
      const double u = std::exp(4.0 * double(j) / double(K - 1));
      profile.points.push_back({u, 0.3, 0.0});
    }
    double min_margin = 1e300;
    bool spacing_ok = true;
    for (double A : {1.5, 2.0, 4.0}) {
      const ScaleSelection sel = select_scales(profile, A);
      const double guarantee = log_integral(profile) / (4.0 * std::log(A));
      min_margin = std::min(min_margin, sel.trace_sum - guarantee);
      for (std::size_t i = 0; i + 1 < sel.scales.size(); ++i) {
        spacing_ok = spacing_ok && !(A * sel.scales[i] > sel.scales[i + 1]);
      }
    }
    add(rep, "scale_selection_guarantee",
        spacing_ok && min_margin >= -1e-12, min_margin,
        fmt("smallest excess of trace_sum over the guarantee: %.3g",
            min_margin));
  }

  {
    const StoppedWalkLaw rl = stopped_law(
        sanov,
        StoppingTimeSpec::renewal({Rational(1), Rational(1)}, {Rational(3)}),
        1);
    const StoppedWalkLaw dl =
        stopped_law(sanov, StoppingTimeSpec::deterministic({3}), 1);
    bool equal = rl.law.size() == dl.law.size() &&
                 rl.time_distribution == dl.time_distribution;
    if (equal) {
      for (std::size_t i = 0; i < rl.law.size(); ++i) {
        equal = equal &&
                RatMat::compare(rl.law.atoms()[i].element.exact(),
                                dl.law.atoms()[i].element.exact()) == 0 &&
                rl.law.atoms()[i].weight == dl.law.atoms()[i].weight;
      }
    }
    add(rep, "stopped_walk_renewal_consistency", equal, 0.0,
        equal ? "unit-cost renewal equals the three-step law exactly"
              : "unit-cost renewal diverged from the three-step law");
  }

  {
    const StoppedWalkLaw sl = stopped_law(
        sanov,
        StoppingTimeSpec::renewal({Rational(1), Rational(2)}, {Rational(6)}),
        1);
    const double dev = std::abs(shannon_entropy(sl.law) -
                                sl.expected_eta.get_d() * std::log(2.0));
    add(rep, "stopped_walk_entropy_identity", dev <= 1e-12, 1e-12 - dev,
        fmt("|H(law) - E[eta] log 2| = %.3g", dev));
  }

  {
    const LdpReport ldp = ldp_check(
        sanov,
        StoppingTimeSpec::renewal(
            {Rational(1), Rational(2)},
            {Rational(8), Rational(12), Rational(16), Rational(20)}),
        0.2, {1, 2, 3, 4}, n_mc, RngStream(cfg.seed, 17));
    const double margin = ldp.delta_hat - 2.0 * ldp.delta_std_error;
    add(rep, "ldp_rate_positive", ldp.passes && ldp.delta_hat > 0.0, margin,
        fmt("fitted tail rate %.3g with std error %.3g", ldp.delta_hat,
            ldp.delta_std_error));
  }

  {
    const HarnessTable table = theorem_harness(
        sanov,
        StoppingTimeSpec::renewal({Rational(1), Rational(2)},
                                  {Rational(2), Rational(4)}),
        2.0, 1.1 * std::log(2.0), {1, 2}, n_mc, RngStream(cfg.seed, 18));
    double min_margin = 1e300;
    for (const HarnessRow& row : table.rows) {
      min_margin = std::min(
          min_margin, row.deficit + tol * row.std_error + row.bias_budget);
    }
    add(rep, "harness_deficit_bounded",
        table.scale_rule_ok && min_margin >= 0.0, min_margin,
        fmt("smallest deficit allowance margin: %.3g", min_margin));
  }

  {
    const SmoothingKernel k(LieGroupModel::sl2r(), 2.0, 0.01);
    const std::size_t n = std::min<std::size_t>(n_mc, 20000);
    const int t_old = exec::threads();
    const EntropyEstimate e1 =
        smoothed_entropy(sanov, k, n, RngStream(cfg.seed, 19));
    exec::set_threads(t_old == 1 ? 4 : 1);
    const EntropyEstimate e2 =
        smoothed_entropy(sanov, k, n, RngStream(cfg.seed, 19));
    exec::set_threads(t_old);
    const bool same =
        e1.value == e2.value && e1.std_error == e2.std_error;
    add(rep, "mc_determinism", same, 0.0,
        same ? "worker count does not change estimator bits"
             : fmt("values differ by %.3g", std::abs(e1.value - e2.value)));
  }

  rep.all_pass = true;
  for (const VerifyCheck& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

std::string to_json(const VerifyReport& r) {
  nlohmann::json root;
  root["all_pass"] = r.all_pass;
  nlohmann::json checks = nlohmann::json::array();
  for (const VerifyCheck& c : r.checks) {
    nlohmann::json row;
    row["name"] = c.name;
    row["pass"] = c.pass;
    row["margin"] = c.margin;
    row["detail"] = c.detail;
    checks.push_back(std::move(row));
  }
  root["checks"] = std::move(checks);
  return root.dump(2) + "\n";
}

}  // namespace liewalk
