#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "liewalk/entropy.hpp"
#include "liewalk/kernel.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/rng.hpp"

namespace liewalk {

struct TracePoint {
  /// Trace radius; the witness at kernel scale r certifies u = 2ar.
  double u = 0.0;
  /// Certified lower bound for the trace at radius u (dimensionless).
  double value = 0.0;
  double std_error = 0.0;
};

struct TraceProfile {
  std::vector<TracePoint> points;  // strictly increasing in u
  double a = 0.0;
  std::string source;
};

/// Evaluates the scale witness on a geometric grid of kernel scales in
/// [r_lo, r_hi]; point j uses the stream fork(j), so the profile does not
/// depend on evaluation order or worker count.
TraceProfile trace_profile(const FinSuppMeasure& mu, double a, double r_lo,
                           double r_hi, std::size_t grid_size,
                           std::size_t n_samples, RngStream rng);

/// CSV rows (u, value, std_error) with a header line.
std::string profile_to_csv(const TraceProfile& profile);

/// Trapezoid value of the integral of tr(g;u) du/u over the grid, taken in
/// log-u coordinates.  Deterministic in the profile.
double log_integral(const TraceProfile& profile);

enum class Branch { U, V };

struct ScaleSelection {
  std::vector<double> scales;  // s_1..s_m, s_{i+1} >= A s_i
  std::vector<double> values;  // certified trace bound at each scale
  double A = 0.0;
  std::size_t m = 0;
  double trace_sum = 0.0;
  Branch branch = Branch::U;
  /// Log-integral restricted to the chosen interval family.
  double restricted_integral = 0.0;
  /// max(0, log_integral / (4 log A) - trace_sum): how far the grid
  /// discretization fell short of the construction's guarantee.
  double slack = 0.0;
};

std::string to_json(const ScaleSelection& s);

/// Splits [u_lo, u_hi] into geometric intervals of ratio A, alternately
/// assigned to families U and V, keeps the family with the larger restricted
/// log-integral, and picks the best grid point inside each kept interval
/// (interpolating when an interval contains no grid point).  Scales are
/// clamped to the profile span; spacing s_{i+1} >= A s_i is enforced
/// exactly.
ScaleSelection select_scales(const TraceProfile& profile, double A);

struct GapTraceReport {
  /// Smallest probed entropy gap between the fine and coarse scale bands.
  double C = 0.0;
  double C_std_error = 0.0;
  int N = 0;
  /// trace_constant * (C - N (e^{-a^2/4} + a^3 r2)) / (a^2 log A).
  double predicted_bound = 0.0;
  std::vector<double> probes_r1, probes_r2;
  std::vector<double> entropy_r1, entropy_r2;
  TraceProfile profile;
  ScaleSelection selection;
};

/// End-to-end pipeline: probes the entropy-at-scale gap hypothesis on four
/// geometric probes per band (r1' in [r1, 2r1], r2' in [r2/2, 2r2]), builds
/// the trace profile spanning radii (a r1, 4a r2), and selects scales.
/// Throws HypothesisFailed when the probed gap falls short of required_gap
/// beyond four standard errors.
GapTraceReport entropy_gap_to_trace_sum(const FinSuppMeasure& mu, double a,
                                        double r1, double r2, double A,
                                        std::size_t n_samples, RngStream rng,
                                        double required_gap = 0.0,
                                        double trace_constant = 1.0,
                                        std::size_t grid_size = 32);

}  // namespace liewalk
