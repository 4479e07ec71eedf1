#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "liewalk/entropy.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/rational.hpp"
#include "liewalk/rng.hpp"

namespace liewalk {

/// Family of stopping times for the generator walk g = gamma_1 ... gamma_k.
///
/// Deterministic: eta_n = schedule[n-1] exactly.
/// Renewal: each generator (indexed in the canonical atom order of the walk
/// measure) carries a positive cost, and eta_n is the first k whose
/// accumulated cost reaches thresholds[n-1].  Every path must terminate
/// within cap steps.
struct StoppingTimeSpec {
  enum class Kind { Deterministic, Renewal };
  Kind kind = Kind::Deterministic;
  std::vector<int> schedule;
  std::vector<Rational> costs;
  std::vector<Rational> thresholds;
  int cap = 64;

  static StoppingTimeSpec deterministic(std::vector<int> schedule,
                                        int cap = 64);
  static StoppingTimeSpec renewal(std::vector<Rational> costs,
                                  std::vector<Rational> thresholds,
                                  int cap = 64);
  std::size_t index_count() const {
    return kind == Kind::Deterministic ? schedule.size() : thresholds.size();
  }
};

struct StoppedWalkLaw {
  FinSuppMeasure law;
  /// Terminal branches of the merged enumeration tree.
  std::uint64_t n_paths = 0;
  /// Exact distribution of eta.
  std::map<int, Rational> time_distribution;
  /// E[eta], exact.
  Rational expected_eta = 0;
};

/// Exact law of the walk stopped at eta_n by breadth-first enumeration with
/// exact weight merging.  The law, the time distribution, and E[eta] carry
/// exact rational weights end to end.
StoppedWalkLaw stopped_law(const FinSuppMeasure& mu,
                           const StoppingTimeSpec& spec, std::size_t n);

struct LdpReport {
  double epsilon = 0.0;
  std::vector<std::size_t> grid;
  std::vector<double> L;     // E[eta_n]
  std::vector<double> tail;  // P[|eta_n - L_n| >= eps * L_n]
  /// True when the exact time enumeration overflowed and tails were
  /// estimated by simulating the cost process.
  bool used_monte_carlo = false;
  /// All probed tails vanish; the deviation bound holds trivially.
  bool degenerate = false;
  double delta_hat = 0.0;
  double delta_std_error = 0.0;
  bool passes = false;
  std::string note;
};

/// Tail decay check for P[|eta_n - L_n| >= eps L_n] <= e^{-delta L_n}:
/// computes exact tails from the cost process (group elements never enter),
/// fits -log tail against L_n, and passes when the fitted rate is positive
/// with confidence.  Zero tails are dropped from the fit; an all-zero tail
/// row set is a degenerate pass.
LdpReport ldp_check(const FinSuppMeasure& mu, const StoppingTimeSpec& spec,
                    double eps, const std::vector<std::size_t>& grid,
                    std::size_t n_samples, RngStream rng);

struct HarnessRow {
  std::size_t n = 0;
  double L = 0.0;        // E[eta_n]
  double r = 0.0;        // smoothing scale used
  double M_bound = 0.0;  // separation at depth ceil((1+eps)L)
  double H_est = 0.0;    // entropy of the stopped law at scale r
  double std_error = 0.0;
  double h_mu_L = 0.0;
  double deficit = 0.0;  // H_est - h_mu_L
  double bias_budget = 0.0;
  /// Theorem-form scale cap c_G * M_bound / a, reported for comparison.
  double theorem_scale = 0.0;
  bool r_within_theorem = false;
};

struct HarnessTable {
  std::vector<HarnessRow> rows;
  double a = 1.0;
  double S = 0.0;
  double epsilon = 0.1;
  double trace_constant = 1.0;  // c_G
  /// Walk entropy upper estimate min_{k <= h_mu_steps} H(mu^{*k})/k.
  double h_mu = 0.0;
  int h_mu_steps = 0;
  double max_separation_rate = 0.0;
  bool scale_rule_ok = true;
  std::string warning;
};

/// Entropy-growth harness: for each n computes L_n, the scale
/// r_n = e^{-S L_n} (clamped into the chart and away from underflow, which
/// only strengthens the scale hypothesis), the separation bound at depth
/// ceil((1+eps) L_n), the measured entropy at scale r_n, and the deficit
/// against h_mu * L_n.  Records a warning instead of failing when S does not
/// dominate the computed separation rates.
HarnessTable theorem_harness(const FinSuppMeasure& mu,
                             const StoppingTimeSpec& spec, double a, double S,
                             const std::vector<std::size_t>& grid,
                             std::size_t n_samples, RngStream rng,
                             double eps = 0.1, double trace_constant = 1.0);

/// CSV with columns n,L_n,r_n,M_bound,H_est,std_error,h_mu_Ln,deficit.
std::string harness_to_csv(const HarnessTable& table);

}  // namespace liewalk
