#include "liewalk/entropy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "liewalk/errors.hpp"

namespace liewalk {

namespace exec {
namespace {
std::atomic<int> g_threads{1};
}
void set_threads(int n) { g_threads.store(std::max(1, n)); }
int threads() { return g_threads.load(); }
}  // namespace exec

namespace {

constexpr std::size_t kChunk = 4096;
// Allowance for the 1e-13-relative quadrature tolerance behind C_{a,r} and
// the radial entropy integrals.
constexpr double kQuadBias = 1e-10;

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace

McMoments mc_mean(std::size_t n_samples, const RngStream& base,
                  const std::function<double(RngStream&)>& sample) {
  if (n_samples == 0) throw ConfigError("Monte Carlo needs n_samples >= 1");
  const std::size_t n_chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<double> sums(n_chunks, 0.0), sumsqs(n_chunks, 0.0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_chunks || failed.load()) return;
      RngStream rng = base.fork(i);
      const std::size_t lo = i * kChunk;
      const std::size_t hi = std::min(n_samples, lo + kChunk);
      double s = 0.0, s2 = 0.0;
      try {
        for (std::size_t j = lo; j < hi; ++j) {
          const double v = sample(rng);
          s += v;
          s2 += v * v;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
      sums[i] = s;
      sumsqs[i] = s2;
    }
  };

  const int n_workers =
      static_cast<int>(std::min<std::size_t>(exec::threads(), n_chunks));
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  const double sum = pairwise_sum(sums.data(), n_chunks);
  const double sumsq = pairwise_sum(sumsqs.data(), n_chunks);
  McMoments out;
  out.n = n_samples;
  out.mean = sum / static_cast<double>(n_samples);
  if (n_samples > 1) {
    const double nd = static_cast<double>(n_samples);
    double var = std::max(0.0, sumsq / nd - out.mean * out.mean);
    var *= nd / (nd - 1.0);
    out.std_error = std::sqrt(var / nd);
  }
  return out;
}

MixtureDensity::MixtureDensity(const FinSuppMeasure& mu,
                               const SmoothingKernel& k)
    : model_(mu.model()), kernel_(k), kind_(mu.model().kind()) {
  if (mu.model() != k.model()) {
    throw ModelMismatch("measure and kernel are on different group models");
  }
  c_ = normalizing_constant(k);
  inv_r2_ = 1.0 / (k.r() * k.r());
  radius2_ = k.radius() * k.radius();
  const bool is_matrix = model_.matrix_size() > 0;
  weights_.reserve(mu.size());
  cum_.reserve(mu.size());
  double acc = 0.0;
  for (const auto& a : mu.atoms()) {
    const double w = a.weight.get_d();
    weights_.push_back(w);
    acc += w;
    cum_.push_back(acc);
    if (is_matrix) {
      mats_.push_back(a.element.mat3());
      inv_mats_.push_back(inverse(a.element).mat3());
    } else {
      vecs_.push_back(a.element.vec());
    }
  }
  cum_.back() = 1.0;
}

std::size_t MixtureDensity::pick_atom(double u) const {
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
  return std::min(i, cum_.size() - 1);
}

double MixtureDensity::density_mat(const Eigen::Matrix3d& x) const {
  double total = 0.0;
  for_components_mat(x, [&](std::size_t, const Eigen::Vector3d&, double wf) {
    total += wf;
  });
  return total;
}

double MixtureDensity::density_vec(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for_components_vec(x, [&](std::size_t, const Eigen::VectorXd&, double wf) {
    total += wf;
  });
  return total;
}

double MixtureDensity::density(const GroupElement& x) const {
  if (x.model() != model_) {
    throw ModelMismatch("density query on a different group model");
  }
  return model_.matrix_size() > 0 ? density_mat(x.mat3())
                                  : density_vec(x.vec());
}

double mixture_density(const FinSuppMeasure& mu, const SmoothingKernel& k,
                       const GroupElement& x) {
  return MixtureDensity(mu, k).density(x);
}

EntropyEstimate smoothed_entropy(const FinSuppMeasure& mu,
                                 const SmoothingKernel& k,
                                 std::size_t n_samples, RngStream rng) {
  const MixtureDensity mix(mu, k);
  const bool is_matrix = mu.model().matrix_size() > 0;
  const GroupKind kind = mu.model().kind();
  auto one = [&](RngStream& r) -> double {
    const std::size_t i = mix.pick_atom(r.uniform01());
    const AlgebraVector z = sample_kernel(mix.kernel(), r);
    double d;
    if (is_matrix) {
      const Eigen::Matrix3d y =
          mix.atom_mat(i) * detail::exp_mat(kind, Eigen::Vector3d(z.coords));
      d = mix.density_mat(y);
    } else {
      d = mix.density_vec(mix.atom_vec(i) + z.coords);
    }
    if (!(d > 0.0)) {
      throw DegenerateDensity(
          "mixture density vanished at a sampled point; chart inconsistency");
    }
    return -std::log(d);
  };
  const McMoments mm = mc_mean(n_samples, rng, one);
  return {mm.mean, mm.std_error, n_samples, kQuadBias};
}

EntropyEstimate pushforward_entropy(const SmoothingKernel& k,
                                    std::size_t n_samples, RngStream rng,
                                    double bias_constant) {
  if (k.model().unit_jacobian()) {
    return {kernel_entropy(k).quadrature_value, 0.0, std::max<std::size_t>(n_samples, 1),
            kQuadBias};
  }
  auto one = [&](RngStream& r) -> double {
    const AlgebraVector z = sample_kernel(k, r);
    return -std::log(algebra_density(k, z) * chart_jacobian(z));
  };
  const McMoments mm = mc_mean(n_samples, rng, one);
  return {mm.mean, mm.std_error, n_samples,
          kQuadBias + bias_constant * k.a() * k.r()};
}

EntropyEstimate entropy_at_scale(const FinSuppMeasure& mu,
                                 const SmoothingKernel& k,
                                 std::size_t n_samples, RngStream rng,
                                 double bias_constant) {
  const EntropyEstimate h_mu = smoothed_entropy(mu, k, n_samples, rng.fork(0));
  const EntropyEstimate h_s =
      pushforward_entropy(k, n_samples, rng.fork(1), bias_constant);
  return {h_mu.value - h_s.value,
          std::hypot(h_mu.std_error, h_s.std_error), n_samples,
          h_mu.bias_budget + h_s.bias_budget};
}

EntropyEstimate entropy_between_scales(const FinSuppMeasure& mu, double a,
                                       double r1, double r2,
                                       std::size_t n_samples, RngStream rng,
                                       double bias_constant) {
  if (!(r1 < r2)) {
    throw ConfigError("entropy between scales needs r1 < r2");
  }
  const SmoothingKernel k1(mu.model(), a, r1);
  const SmoothingKernel k2(mu.model(), a, r2);
  const std::size_t half = std::max<std::size_t>(1, n_samples / 2);
  const EntropyEstimate h1 =
      entropy_at_scale(mu, k1, half, rng.fork(0), bias_constant);
  const EntropyEstimate h2 =
      entropy_at_scale(mu, k2, half, rng.fork(1), bias_constant);
  return {h1.value - h2.value, std::hypot(h1.std_error, h2.std_error),
          n_samples, h1.bias_budget + h2.bias_budget};
}

EntropyEstimate kl_divergence(
    const std::function<double(const GroupElement&)>& nu_density,
    const std::function<double(const GroupElement&)>& mu_density,
    const std::function<GroupElement(RngStream&)>& nu_sampler,
    std::size_t n_samples, RngStream rng) {
  auto one = [&](RngStream& r) -> double {
    const GroupElement x = nu_sampler(r);
    const double dn = nu_density(x);
    const double dm = mu_density(x);
    if (!(dn > 0.0)) {
      throw DegenerateDensity("nu density vanished at one of its own samples");
    }
    if (!(dm > 0.0)) {
      throw DegenerateDensity(
          "mu density vanished at a nu sample; nu is not dominated by mu");
    }
    return std::log(dm) - std::log(dn);
  };
  const McMoments mm = mc_mean(n_samples, rng, one);
  return {mm.mean, mm.std_error, n_samples, 0.0};
}

}  // namespace liewalk
