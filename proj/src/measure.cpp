#include "liewalk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "liewalk/errors.hpp"

namespace liewalk {

namespace {

constexpr double kWeightTol = 1e-12;
constexpr double kDedupTol = 1e-9;

bool flat_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

bool atoms_all_exact(const std::vector<Atom>& atoms) {
  for (const auto& a : atoms) {
    if (!a.element.has_exact()) return false;
  }
  return true;
}

/// Sort into canonical order and merge duplicate support points.  With a
/// fully exact support the order and the merges are exact; otherwise atoms
/// are ordered by their flattened double representation and merged when it
/// agrees within kDedupTol in sup norm.
std::vector<Atom> canonicalize(std::vector<Atom> atoms) {
  std::vector<Atom> out;
  out.reserve(atoms.size());
  if (atoms_all_exact(atoms)) {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
      return RatMat::compare(a.element.exact(), b.element.exact()) < 0;
    });
    for (auto& a : atoms) {
      if (!out.empty() &&
          RatMat::compare(out.back().element.exact(), a.element.exact()) == 0) {
        out.back().weight += a.weight;
      } else {
        out.push_back(std::move(a));
      }
    }
  } else {
    std::vector<std::pair<Eigen::VectorXd, Atom>> keyed;
    keyed.reserve(atoms.size());
    for (auto& a : atoms) keyed.emplace_back(a.element.flat(), std::move(a));
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return flat_less(a.first, b.first); });
    Eigen::VectorXd kept_key;
    for (auto& [key, atom] : keyed) {
      if (!out.empty() &&
          (key - kept_key).cwiseAbs().maxCoeff() <= kDedupTol) {
        out.back().weight += atom.weight;
      } else {
        kept_key = key;
        out.push_back(std::move(atom));
      }
    }
  }
  return out;
}

}  // namespace

FinSuppMeasure FinSuppMeasure::from_atoms(std::vector<Atom> atoms) {
  std::vector<Atom> kept;
  kept.reserve(atoms.size());
  for (auto& a : atoms) {
    if (a.weight < 0) throw ConfigError("atom weights must be nonnegative");
    if (a.weight != 0) kept.push_back(std::move(a));
  }
  if (kept.empty()) {
    throw ConfigError("a measure needs at least one atom with positive weight");
  }
  const LieGroupModel model = kept.front().element.model();
  Rational total = 0;
  for (const auto& a : kept) {
    if (a.element.model() != model) {
      throw ModelMismatch("all atoms of a measure must share one group model");
    }
    total += a.weight;
  }
  const Rational gap = total - 1;
  if (std::abs(gap.get_d()) > kWeightTol) {
    throw ConfigError("atom weights must sum to 1, got " +
                      rational_to_string(total));
  }
  for (auto& a : kept) a.weight /= total;
  auto canon = canonicalize(std::move(kept));
  if (canon.size() > kSupportCap) {
    throw SupportOverflow("measure support of " + std::to_string(canon.size()) +
                          " atoms exceeds the cap of " +
                          std::to_string(kSupportCap));
  }
  FinSuppMeasure mu(model);
  mu.atoms_ = std::move(canon);
  return mu;
}

FinSuppMeasure FinSuppMeasure::dirac(const GroupElement& g) {
  return from_atoms({Atom{g, Rational(1)}});
}

bool FinSuppMeasure::exact_support() const { return atoms_all_exact(atoms_); }

FinSuppMeasure convolve(const FinSuppMeasure& mu, const FinSuppMeasure& nu) {
  if (mu.model() != nu.model()) {
    throw ModelMismatch("convolution needs measures on the same group model");
  }
  const std::size_t products = mu.size() * nu.size();
  if (products > FinSuppMeasure::kSupportCap) {
    throw SupportOverflow("convolution would form " + std::to_string(products) +
                          " products, over the cap of " +
                          std::to_string(FinSuppMeasure::kSupportCap));
  }
  std::vector<Atom> out;
  out.reserve(products);
  for (const auto& a : mu.atoms()) {
    for (const auto& b : nu.atoms()) {
      out.push_back(Atom{multiply(a.element, b.element), a.weight * b.weight});
    }
  }
  return FinSuppMeasure::from_atoms(std::move(out));
}

FinSuppMeasure convolution_power(const FinSuppMeasure& mu, int n) {
  if (n < 0) throw ConfigError("convolution power needs n >= 0");
  FinSuppMeasure result =
      FinSuppMeasure::dirac(GroupElement::identity(mu.model()));
  for (int i = 0; i < n; ++i) result = convolve(result, mu);
  return result;
}

double shannon_entropy(const FinSuppMeasure& mu) {
  double h = 0.0;
  for (const auto& a : mu.atoms()) {
    const double w = a.weight.get_d();
    h -= w * std::log(w);
  }
  return h;
}

SeparationReport separation_rate(const FinSuppMeasure& mu, int n) {
  if (n < 0) throw ConfigError("separation order needs n >= 0");
  std::vector<Atom> pool;
  FinSuppMeasure power =
      FinSuppMeasure::dirac(GroupElement::identity(mu.model()));
  for (const auto& a : power.atoms()) pool.push_back(Atom{a.element, 1});
  for (int k = 1; k <= n; ++k) {
    power = convolve(power, mu);
    for (const auto& a : power.atoms()) pool.push_back(Atom{a.element, 1});
  }
  auto support = canonicalize(std::move(pool));
  if (support.size() > FinSuppMeasure::kSupportCap) {
    throw SupportOverflow("support union of " + std::to_string(support.size()) +
                          " points exceeds the cap");
  }

  SeparationReport rep;
  rep.n = n;
  rep.support_size = support.size();
  rep.pair_count = support.size() * (support.size() - 1) / 2;
  if (support.size() < 2) {
    rep.min_distance =
        ChartDistance::lower_bound(std::numeric_limits<double>::infinity());
    return rep;
  }

  double best_exact = std::numeric_limits<double>::infinity();
  double best_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < support.size(); ++i) {
    for (std::size_t j = i + 1; j < support.size(); ++j) {
      const ChartDistance d = distance(support[i].element, support[j].element);
      if (d.at_least) {
        best_bound = std::min(best_bound, d.value);
      } else {
        best_exact = std::min(best_exact, d.value);
      }
    }
  }
  // Every sentinel pair is at true distance >= the chart radius, while exact
  // values on those models always sit inside it, so an exact minimum wins.
  if (std::isfinite(best_exact)) {
    rep.min_distance = ChartDistance::exact(best_exact);
  } else {
    rep.min_distance = ChartDistance::lower_bound(best_bound);
  }

  if (n >= 1) {
    const double m = rep.min_distance.value;
    if (m > 0 && std::isfinite(m)) {
      rep.rate = -std::log(m) / n;
      rep.rate_is_upper_bound = rep.min_distance.at_least;
    } else if (m == 0) {
      rep.rate = std::numeric_limits<double>::infinity();
    }
  }
  return rep;
}

RwEntropyEstimate rw_entropy_estimate(const FinSuppMeasure& mu, int n) {
  if (n < 1) throw ConfigError("random walk entropy estimate needs n >= 1");
  RwEntropyEstimate est;
  est.entropies.reserve(n);
  FinSuppMeasure power = mu;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n; ++k) {
    if (k > 1) power = convolve(power, mu);
    const double h = shannon_entropy(power);
    est.entropies.push_back(h);
    best = std::min(best, h / k);
  }
  est.value = best;
  return est;
}

}  // namespace liewalk
