#include "liewalk/scales.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "liewalk/conditioning.hpp"
#include "liewalk/errors.hpp"

namespace liewalk {

namespace {

// Linear interpolation of the profile value in log-u, clamped to the end
// values outside the grid.
double interp_value(const TraceProfile& p, double u) {
  const auto& pts = p.points;
  if (u <= pts.front().u) return pts.front().value;
  if (u >= pts.back().u) return pts.back().value;
  auto it = std::upper_bound(
      pts.begin(), pts.end(), u,
      [](double lhs, const TracePoint& q) { return lhs < q.u; });
  const TracePoint& hi = *it;
  const TracePoint& lo = *(it - 1);
  const double w = (std::log(u) - std::log(lo.u)) /
                   (std::log(hi.u) - std::log(lo.u));
  return lo.value + w * (hi.value - lo.value);
}

}  // namespace

TraceProfile trace_profile(const FinSuppMeasure& mu, double a, double r_lo,
                           double r_hi, std::size_t grid_size,
                           std::size_t n_samples, RngStream rng) {
  if (grid_size < 8) throw ConfigError("trace profile needs grid_size >= 8");
  if (!(r_lo > 0.0) || !(r_hi > r_lo))
    throw ConfigError("trace profile needs 0 < r_lo < r_hi");

  TraceProfile out;
  out.a = a;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "model=%s atoms=%zu",
                mu.model().name().c_str(), mu.atoms().size());
  out.source = buf;

  const double step = std::log(r_hi / r_lo) / double(grid_size - 1);
  out.points.reserve(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    double r = r_lo * std::exp(double(j) * step);
    if (j == 0) r = r_lo;
    if (j + 1 == grid_size) r = r_hi;
    const TraceWitness w =
        trace_at_scale_witness(mu, a, r, n_samples, rng.fork(j));
    out.points.push_back({w.radius, w.t, w.std_error});
  }
  for (std::size_t j = 1; j < out.points.size(); ++j) {
    if (!(out.points[j - 1].u < out.points[j].u))
      throw ConfigError("trace profile grid is not strictly increasing");
  }
  return out;
}

std::string profile_to_csv(const TraceProfile& profile) {
  std::string out = "u,value,std_error\n";
  char line[128];
  for (const TracePoint& p : profile.points) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", p.u, p.value,
                  p.std_error);
    out += line;
  }
  return out;
}

double log_integral(const TraceProfile& profile) {
  const auto& pts = profile.points;
  if (pts.size() < 2)
    throw ConfigError("log integral needs at least two profile points");
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const double dt = std::log(pts[j + 1].u) - std::log(pts[j].u);
    total += 0.5 * (pts[j].value + pts[j + 1].value) * dt;
  }
  return total;
}

std::string to_json(const ScaleSelection& s) {
  nlohmann::json j;
  j["scales"] = s.scales;
  j["values"] = s.values;
  j["A"] = s.A;
  j["m"] = s.m;
  j["trace_sum"] = s.trace_sum;
  j["branch"] = s.branch == Branch::U ? "U" : "V";
  j["restricted_integral"] = s.restricted_integral;
  j["slack"] = s.slack;
  return j.dump(2);
}

ScaleSelection select_scales(const TraceProfile& profile, double A) {
  if (!(A > 1.0)) throw ConfigError("scale ratio A must exceed 1");
  const auto& pts = profile.points;
  if (pts.size() < 2)
    throw ConfigError("scale selection needs at least two profile points");
  const double u_lo = pts.front().u;
  const double u_hi = pts.back().u;
  if (!(u_hi > A * A * u_lo)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "profile span [%g, %g] does not cover one U/V interval "
                  "pair at ratio %g",
                  u_lo, u_hi, A);
    throw RangeTooNarrow(buf);
  }

  const double logA = std::log(A);
  const double span = std::log(u_hi) - std::log(u_lo);
  const std::size_t m = std::size_t(std::ceil(span / (2.0 * logA)));

  // Interval k (1-based) is [bound[k], bound[k+1]); odd k belongs to U,
  // even k to V.  Recursive multiplication keeps bound[k+1] == A*bound[k]
  // exactly in floating point.
  std::vector<double> bound(2 * m + 2);
  bound[1] = u_lo;
  for (std::size_t k = 2; k < bound.size(); ++k) bound[k] = A * bound[k - 1];
  if (bound.back() <= u_hi)
    bound.back() = std::nextafter(u_hi, std::numeric_limits<double>::max());

  const auto interval_of = [&](double u) -> std::size_t {
    std::size_t k = 1;
    while (k + 2 < bound.size() && bound[k + 1] <= u) ++k;
    return k;
  };

  // Split each trapezoid segment at interval boundaries so both families
  // get their exact share of the log-integral.
  double int_u = 0.0, int_v = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    std::vector<double> cuts{pts[j].u};
    for (std::size_t k = 2; k + 1 < bound.size(); ++k)
      if (bound[k] > pts[j].u && bound[k] < pts[j + 1].u)
        cuts.push_back(bound[k]);
    cuts.push_back(pts[j + 1].u);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double va = interp_value(profile, cuts[c]);
      const double vb = interp_value(profile, cuts[c + 1]);
      const double dt = std::log(cuts[c + 1]) - std::log(cuts[c]);
      const double piece = 0.5 * (va + vb) * dt;
      const std::size_t k = interval_of(std::sqrt(cuts[c] * cuts[c + 1]));
      (k % 2 == 1 ? int_u : int_v) += piece;
    }
  }

  ScaleSelection sel;
  sel.A = A;
  sel.m = m;
  sel.branch = int_u >= int_v ? Branch::U : Branch::V;
  sel.restricted_integral = std::max(int_u, int_v);
  const double u_top = std::nextafter(u_hi, std::numeric_limits<double>::max());

  sel.scales.resize(m);
  sel.values.resize(m);
  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t k = sel.branch == Branch::U ? 2 * i - 1 : 2 * i;
    const double lo = std::max(bound[k], u_lo);
    const double hi = std::min(bound[k + 1], u_top);
    double best_u = -1.0, best_v = 0.0;
    for (const TracePoint& p : pts) {
      if (p.u < lo || p.u >= hi) continue;
      if (best_u < 0.0 || p.value > best_v) {
        best_u = p.u;
        best_v = p.value;
      }
    }
    if (best_u < 0.0) {
      best_u = lo < hi ? std::sqrt(lo * hi) : std::min(lo, u_hi);
      best_u = std::min(std::max(best_u, u_lo), u_hi);
      best_v = interp_value(profile, best_u);
    }
    sel.scales[i - 1] = best_u;
    sel.values[i - 1] = best_v;
  }

  // Interpolated fallbacks near the top of the range can crowd together;
  // push them back down until the geometric spacing holds exactly.
  for (std::size_t i = m; i-- > 1;) {
    double& s = sel.scales[i - 1];
    if (A * s > sel.scales[i]) {
      s = sel.scales[i] / A;
      while (A * s > sel.scales[i]) s = std::nextafter(s, 0.0);
      sel.values[i - 1] = interp_value(profile, s);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (sel.scales[i] < u_lo || sel.scales[i] > u_hi)
      throw std::logic_error("selected scale left the profile span");
    if (i + 1 < m && A * sel.scales[i] > sel.scales[i + 1])
      throw std::logic_error("selected scales violate geometric spacing");
  }

  for (double v : sel.values) sel.trace_sum += v;
  sel.slack =
      std::max(0.0, (int_u + int_v) / (4.0 * logA) - sel.trace_sum);
  return sel;
}

GapTraceReport entropy_gap_to_trace_sum(const FinSuppMeasure& mu, double a,
                                        double r1, double r2, double A,
                                        std::size_t n_samples, RngStream rng,
                                        double required_gap,
                                        double trace_constant,
                                        std::size_t grid_size) {
  if (!(r1 > 0.0) || !(r2 > r1))
    throw ConfigError("entropy gap pipeline needs 0 < r1 < r2");
  if (!(A > 1.0)) throw ConfigError("scale ratio A must exceed 1");

  GapTraceReport rep;
  for (int k = 0; k < 4; ++k) {
    rep.probes_r1.push_back(r1 * std::pow(2.0, k / 3.0));
    rep.probes_r2.push_back(0.5 * r2 * std::pow(4.0, k / 3.0));
  }

  std::vector<double> se1, se2;
  for (int k = 0; k < 4; ++k) {
    const SmoothingKernel fine(mu.model(), a, rep.probes_r1[k]);
    const EntropyEstimate e1 =
        entropy_at_scale(mu, fine, n_samples, rng.fork(100 + k));
    rep.entropy_r1.push_back(e1.value);
    se1.push_back(e1.std_error);
    const SmoothingKernel coarse(mu.model(), a, rep.probes_r2[k]);
    const EntropyEstimate e2 =
        entropy_at_scale(mu, coarse, n_samples, rng.fork(200 + k));
    rep.entropy_r2.push_back(e2.value);
    se2.push_back(e2.std_error);
  }
  const std::size_t i_min =
      std::min_element(rep.entropy_r1.begin(), rep.entropy_r1.end()) -
      rep.entropy_r1.begin();
  const std::size_t i_max =
      std::max_element(rep.entropy_r2.begin(), rep.entropy_r2.end()) -
      rep.entropy_r2.begin();
  rep.C = rep.entropy_r1[i_min] - rep.entropy_r2[i_max];
  rep.C_std_error = std::hypot(se1[i_min], se2[i_max]);
  if (rep.C < required_gap - 4.0 * rep.C_std_error) {
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "probed entropy gap %.6g (std error %.3g) between scales "
                  "%.6g and %.6g falls short of the required %.6g",
                  rep.C, rep.C_std_error, rep.probes_r1[i_min],
                  rep.probes_r2[i_max], required_gap);
    throw HypothesisFailed(buf);
  }

  rep.profile = trace_profile(mu, a, 0.5 * r1, 2.0 * r2, grid_size,
                              n_samples, rng.fork(300));
  rep.selection = select_scales(rep.profile, A);

  rep.N = std::max(
      0, int(std::ceil((std::log(r2) - std::log(r1)) / std::log(2.0))) - 1);
  const double defect = double(rep.N) * (std::exp(-a * a / 4.0) + a * a * a * r2);
  rep.predicted_bound =
      trace_constant * (rep.C - defect) / (a * a * std::log(A));
  return rep;
}

}  // namespace liewalk
