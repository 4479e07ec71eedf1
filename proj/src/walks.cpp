#include "liewalk/walks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "liewalk/errors.hpp"
#include "liewalk/kernel.hpp"

namespace liewalk {

namespace {

constexpr std::size_t kTimeStateCap = std::size_t(1) << 14;

int cmp_key(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < y[i]) return -1;
    if (x[i] > y[i]) return 1;
  }
  return 0;
}

int cmp_element(const GroupElement& a, const Eigen::VectorXd& ka,
                const GroupElement& b, const Eigen::VectorXd& kb) {
  if (const int c = cmp_key(ka, kb)) return c;
  if (a.has_exact() != b.has_exact()) return a.has_exact() ? 1 : -1;
  if (a.has_exact()) return RatMat::compare(a.exact(), b.exact());
  return 0;
}

struct WalkState {
  GroupElement g;
  Eigen::VectorXd key;
  Rational cost;
  Rational weight;
};

void merge_states(std::vector<WalkState>& v) {
  std::sort(v.begin(), v.end(), [](const WalkState& x, const WalkState& y) {
    const int c = cmp(x.cost, y.cost);
    if (c != 0) return c < 0;
    return cmp_element(x.g, x.key, y.g, y.key) < 0;
  });
  std::vector<WalkState> out;
  out.reserve(v.size());
  for (auto& s : v) {
    if (!out.empty() && cmp(out.back().cost, s.cost) == 0 &&
        cmp_element(out.back().g, out.back().key, s.g, s.key) == 0) {
      out.back().weight += s.weight;
    } else {
      out.push_back(std::move(s));
    }
  }
  v = std::move(out);
}

void merge_terminal(std::vector<Atom>& v) {
  std::vector<std::pair<Eigen::VectorXd, std::size_t>> keyed;
  keyed.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    keyed.emplace_back(v[i].element.flat(), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& x, const auto& y) {
    return cmp_element(v[x.second].element, x.first, v[y.second].element,
                       y.first) < 0;
  });
  std::vector<Atom> out;
  out.reserve(v.size());
  Eigen::VectorXd kept_key;
  for (const auto& [key, i] : keyed) {
    if (!out.empty() &&
        cmp_element(out.back().element, kept_key, v[i].element, key) == 0) {
      out.back().weight += v[i].weight;
    } else {
      out.push_back(v[i]);
      kept_key = key;
    }
  }
  v = std::move(out);
}

void validate_renewal(const FinSuppMeasure& mu, const StoppingTimeSpec& spec) {
  if (spec.costs.size() != mu.atoms().size()) {
    throw ConfigError("renewal costs cover " +
                      std::to_string(spec.costs.size()) +
                      " generators but the walk measure has " +
                      std::to_string(mu.atoms().size()) + " atoms");
  }
  for (const Rational& c : spec.costs) {
    if (c <= 0) throw ConfigError("renewal costs must be positive");
  }
  for (const Rational& t : spec.thresholds) {
    if (t <= 0) throw ConfigError("renewal thresholds must be positive");
  }
}

StoppedWalkLaw deterministic_law(const FinSuppMeasure& mu, int steps,
                                 int cap) {
  if (steps < 0) throw ConfigError("schedule entries must be >= 0");
  if (steps > cap) {
    throw CapExceeded("schedule entry " + std::to_string(steps) +
                      " exceeds the step cap " + std::to_string(cap));
  }
  StoppedWalkLaw out{
      FinSuppMeasure::dirac(GroupElement::identity(mu.model())), 1, {}, 0};
  if (steps > 0) {
    const FinSuppMeasure prev = convolution_power(mu, steps - 1);
    out.law = convolve(prev, mu);
    out.n_paths =
        std::uint64_t(prev.atoms().size()) * mu.atoms().size();
  }
  out.time_distribution[steps] = 1;
  out.expected_eta = steps;
  return out;
}

StoppedWalkLaw renewal_law(const FinSuppMeasure& mu,
                           const StoppingTimeSpec& spec,
                           const Rational& threshold) {
  const auto& gens = mu.atoms();
  std::vector<WalkState> frontier;
  frontier.push_back({GroupElement::identity(mu.model()),
                      GroupElement::identity(mu.model()).flat(), 0, 1});
  std::vector<Atom> terminal;
  std::map<int, Rational> td;
  std::uint64_t n_paths = 0;

  for (int k = 1;; ++k) {
    const std::size_t products = frontier.size() * gens.size();
    if (products > FinSuppMeasure::kSupportCap) {
      throw SupportOverflow("stopped walk would expand " +
                            std::to_string(products) + " states at step " +
                            std::to_string(k) + ", over the cap of " +
                            std::to_string(FinSuppMeasure::kSupportCap));
    }
    std::vector<WalkState> next;
    for (const WalkState& s : frontier) {
      for (std::size_t i = 0; i < gens.size(); ++i) {
        Rational c2 = s.cost + spec.costs[i];
        GroupElement g2 = multiply(s.g, gens[i].element);
        Rational w2 = s.weight * gens[i].weight;
        if (c2 >= threshold) {
          td[k] += w2;
          terminal.push_back(Atom{std::move(g2), std::move(w2)});
          ++n_paths;
        } else {
          Eigen::VectorXd key = g2.flat();
          next.push_back(
              {std::move(g2), std::move(key), std::move(c2), std::move(w2)});
        }
      }
    }
    if (terminal.size() > FinSuppMeasure::kSupportCap) {
      merge_terminal(terminal);
      if (terminal.size() > FinSuppMeasure::kSupportCap) {
        throw SupportOverflow("stopped law support of " +
                              std::to_string(terminal.size()) +
                              " atoms exceeds the cap");
      }
    }
    if (next.empty()) break;
    if (k == spec.cap) {
      throw CapExceeded("a stopped path did not terminate within the cap of " +
                        std::to_string(spec.cap) + " steps");
    }
    merge_states(next);
    frontier = std::move(next);
  }

  StoppedWalkLaw out{FinSuppMeasure::from_atoms(std::move(terminal)), n_paths,
                     std::move(td), 0};
  for (const auto& [k, p] : out.time_distribution) out.expected_eta += k * p;
  return out;
}

// Exact law of eta alone: the walk on accumulated costs, no group elements.
// Throws SupportOverflow when the cost-state space outgrows kTimeStateCap.
std::map<int, Rational> time_law(const FinSuppMeasure& mu,
                                 const StoppingTimeSpec& spec,
                                 const Rational& threshold) {
  std::map<Rational, Rational> states{{Rational(0), Rational(1)}};
  std::map<int, Rational> td;
  for (int k = 1;; ++k) {
    std::map<Rational, Rational> next;
    for (const auto& [c, p] : states) {
      for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
        const Rational c2 = c + spec.costs[i];
        const Rational w2 = p * mu.atoms()[i].weight;
        if (c2 >= threshold) {
          td[k] += w2;
        } else {
          next[c2] += w2;
        }
      }
    }
    if (next.size() > kTimeStateCap) {
      throw SupportOverflow("cost-state space outgrew the enumeration cap");
    }
    if (next.empty()) break;
    if (k == spec.cap) {
      throw CapExceeded("a stopped path did not terminate within the cap of " +
                        std::to_string(spec.cap) + " steps");
    }
    states = std::move(next);
  }
  return td;
}

struct TailRow {
  double L = 0.0;
  double tail = 0.0;
};

TailRow tail_from_time_law(const std::map<int, Rational>& td, double eps) {
  Rational mean = 0;
  for (const auto& [k, p] : td) mean += k * p;
  const double L = mean.get_d();
  Rational tail = 0;
  for (const auto& [k, p] : td) {
    if (std::abs(double(k) - L) >= eps * L) tail += p;
  }
  return {L, tail.get_d()};
}

TailRow tail_by_simulation(const FinSuppMeasure& mu,
                           const StoppingTimeSpec& spec,
                           const Rational& threshold, double eps,
                           std::size_t n_samples, RngStream rng) {
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& a : mu.atoms()) {
    acc += a.weight.get_d();
    cum.push_back(acc);
  }
  std::vector<double> cost_d;
  for (const Rational& c : spec.costs) cost_d.push_back(c.get_d());
  const double theta = threshold.get_d();

  std::vector<int> etas(n_samples);
  double mean = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    double cost = 0.0;
    int steps = 0;
    while (cost < theta) {
      if (steps >= spec.cap) {
        throw CapExceeded("a simulated path did not terminate within the cap");
      }
      const double u = rng.uniform01();
      std::size_t i =
          std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
      if (i >= cost_d.size()) i = cost_d.size() - 1;
      cost += cost_d[i];
      ++steps;
    }
    etas[s] = steps;
    mean += steps;
  }
  mean /= double(n_samples);
  std::size_t hits = 0;
  for (const int e : etas) {
    if (std::abs(double(e) - mean) >= eps * mean) ++hits;
  }
  return {mean, double(hits) / double(n_samples)};
}

}  // namespace

StoppingTimeSpec StoppingTimeSpec::deterministic(std::vector<int> schedule,
                                                 int cap) {
  StoppingTimeSpec s;
  s.kind = Kind::Deterministic;
  s.schedule = std::move(schedule);
  s.cap = cap;
  return s;
}

StoppingTimeSpec StoppingTimeSpec::renewal(std::vector<Rational> costs,
                                           std::vector<Rational> thresholds,
                                           int cap) {
  StoppingTimeSpec s;
  s.kind = Kind::Renewal;
  s.costs = std::move(costs);
  s.thresholds = std::move(thresholds);
  s.cap = cap;
  return s;
}

StoppedWalkLaw stopped_law(const FinSuppMeasure& mu,
                           const StoppingTimeSpec& spec, std::size_t n) {
  if (spec.cap < 1) throw ConfigError("stopping cap must be >= 1");
  if (n < 1 || n > spec.index_count()) {
    throw ConfigError("stopping index " + std::to_string(n) +
                      " is outside the schedule of length " +
                      std::to_string(spec.index_count()));
  }
  if (spec.kind == StoppingTimeSpec::Kind::Deterministic) {
    return deterministic_law(mu, spec.schedule[n - 1], spec.cap);
  }
  validate_renewal(mu, spec);
  return renewal_law(mu, spec, spec.thresholds[n - 1]);
}

LdpReport ldp_check(const FinSuppMeasure& mu, const StoppingTimeSpec& spec,
                    double eps, const std::vector<std::size_t>& grid,
                    std::size_t n_samples, RngStream rng) {
  if (!(eps > 0.0)) throw ConfigError("deviation fraction eps must be > 0");
  if (grid.empty()) throw ConfigError("ldp check needs a nonempty grid");
  if (spec.cap < 1) throw ConfigError("stopping cap must be >= 1");
  if (spec.kind == StoppingTimeSpec::Kind::Renewal) validate_renewal(mu, spec);

  LdpReport rep;
  rep.epsilon = eps;
  rep.grid = grid;
  for (const std::size_t n : grid) {
    if (n < 1 || n > spec.index_count()) {
      throw ConfigError("stopping index " + std::to_string(n) +
                        " is outside the schedule of length " +
                        std::to_string(spec.index_count()));
    }
    TailRow row;
    if (spec.kind == StoppingTimeSpec::Kind::Deterministic) {
      const int steps = spec.schedule[n - 1];
      if (steps > spec.cap) {
        throw CapExceeded("schedule entry " + std::to_string(steps) +
                          " exceeds the step cap");
      }
      row = {double(steps), 0.0};
    } else {
      try {
        row = tail_from_time_law(time_law(mu, spec, spec.thresholds[n - 1]),
                                 eps);
      } catch (const SupportOverflow&) {
        rep.used_monte_carlo = true;
        row = tail_by_simulation(mu, spec, spec.thresholds[n - 1], eps,
                                 std::max<std::size_t>(n_samples, 1),
                                 rng.fork(n));
      }
    }
    rep.L.push_back(row.L);
    rep.tail.push_back(row.tail);
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.tail.size(); ++i) {
    if (rep.tail[i] > 0.0) {
      xs.push_back(rep.L[i]);
      ys.push_back(-std::log(rep.tail[i]));
    }
  }
  if (xs.empty()) {
    rep.degenerate = true;
    rep.passes = true;
    rep.delta_hat = std::numeric_limits<double>::infinity();
    rep.note = "degenerate: every probed tail vanishes, the deviation bound "
               "holds with any rate";
    return rep;
  }
  if (xs.size() == 1) {
    rep.delta_hat = ys[0] / xs[0];
    rep.passes = rep.delta_hat > 0.0;
    rep.note = "single positive tail; rate read from one point";
    return rep;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) {
    rep.note = "all probed rows share one L; no rate can be fitted";
    return rep;
  }
  rep.delta_hat = sxy / sxx;
  if (xs.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - my - rep.delta_hat * (xs[i] - mx);
      rss += e * e;
    }
    rep.delta_std_error = std::sqrt(rss / double(xs.size() - 2) / sxx);
  }
  rep.passes = rep.delta_hat > 0.0 &&
               (rep.delta_std_error == 0.0 ||
                rep.delta_hat > 2.0 * rep.delta_std_error);
  char note[128];
  std::snprintf(note, sizeof(note),
                "fitted rate %.4g (std error %.4g) over %zu positive tails",
                rep.delta_hat, rep.delta_std_error, xs.size());
  rep.note = note;
  return rep;
}

HarnessTable theorem_harness(const FinSuppMeasure& mu,
                             const StoppingTimeSpec& spec, double a, double S,
                             const std::vector<std::size_t>& grid,
                             std::size_t n_samples, RngStream rng, double eps,
                             double trace_constant) {
  if (grid.empty()) throw ConfigError("harness needs a nonempty grid");
  if (!(eps > 0.0)) throw ConfigError("schedule margin eps must be > 0");

  HarnessTable table;
  table.a = a;
  table.S = S;
  table.epsilon = eps;
  table.trace_constant = trace_constant;

  double max_L = 0.0;
  bool any_rate = false;
  for (const std::size_t n : grid) {
    const StoppedWalkLaw sl = stopped_law(mu, spec, n);
    HarnessRow row;
    row.n = n;
    row.L = sl.expected_eta.get_d();
    max_L = std::max(max_L, row.L);

    double r = std::exp(-S * row.L);
    if (!mu.model().global_chart()) {
      r = std::min(r, 0.45 * mu.model().chart_radius() / a);
    }
    row.r = std::max(r, 1e-90);

    const int depth = std::max(1, int(std::ceil((1.0 + eps) * row.L)));
    const SeparationReport sep = separation_rate(mu, depth);
    row.M_bound = sep.min_distance.bound();
    if (sep.rate) {
      any_rate = true;
      table.max_separation_rate =
          std::max(table.max_separation_rate, *sep.rate);
    }
    row.theorem_scale = trace_constant * row.M_bound / a;
    row.r_within_theorem = row.r <= row.theorem_scale;

    const SmoothingKernel kernel(mu.model(), a, row.r);
    const EntropyEstimate est =
        entropy_at_scale(sl.law, kernel, n_samples, rng.fork(n));
    row.H_est = est.value;
    row.std_error = est.std_error;
    row.bias_budget = est.bias_budget;
    table.rows.push_back(row);
  }

  int depth_cap = 14;
  if (mu.atoms().size() >= 2) {
    depth_cap = std::min(
        depth_cap, int(std::log(double(FinSuppMeasure::kSupportCap)) /
                       std::log(double(mu.atoms().size()))));
  }
  table.h_mu_steps = std::max(1, std::min(depth_cap, int(std::ceil(max_L))));
  table.h_mu = rw_entropy_estimate(mu, table.h_mu_steps).value;
  for (HarnessRow& row : table.rows) {
    row.h_mu_L = table.h_mu * row.L;
    row.deficit = row.H_est - row.h_mu_L;
  }

  table.scale_rule_ok = !any_rate || S > table.max_separation_rate;
  if (!table.scale_rule_ok) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "S = %.6g does not dominate the largest computed "
                  "separation rate %.6g",
                  S, table.max_separation_rate);
    table.warning = buf;
  }
  return table;
}

std::string harness_to_csv(const HarnessTable& table) {
  std::string out = "n,L_n,r_n,M_bound,H_est,std_error,h_mu_Ln,deficit\n";
  char line[256];
  for (const HarnessRow& r : table.rows) {
    std::snprintf(line, sizeof(line),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.n, r.L,
                  r.r, r.M_bound, r.H_est, r.std_error, r.h_mu_L, r.deficit);
    out += line;
  }
  return out;
}

}  // namespace liewalk
