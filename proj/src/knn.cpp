#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "liewalk/entropy.hpp"
#include "liewalk/errors.hpp"

namespace liewalk {

namespace {

constexpr double kEulerMascheroni = 0.5772156649015329;

/// Static kd-tree over fixed points supporting nearest-neighbor-excluding-
/// self queries.
class KdTree {
 public:
  explicit KdTree(const std::vector<Eigen::VectorXd>& pts)
      : pts_(&pts), dim_(static_cast<int>(pts.front().size())) {
    std::vector<int> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    nodes_.reserve(pts.size());
    root_ = build(idx, 0, static_cast<int>(idx.size()), 0);
  }

  double nn_distance(int self) const {
    double best = std::numeric_limits<double>::infinity();
    query(root_, (*pts_)[self], self, best);
    return best;
  }

 private:
  struct Node {
    int point;
    int axis;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<int>& idx, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % dim_;
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [&](int a, int b) {
                       return (*pts_)[a][axis] < (*pts_)[b][axis];
                     });
    const int node = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{idx[mid], axis});
    nodes_[node].left = build(idx, lo, mid, depth + 1);
    const int right = build(idx, mid + 1, hi, depth + 1);
    nodes_[node].right = right;
    return node;
  }

  void query(int node, const Eigen::VectorXd& q, int self, double& best) const {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    if (nd.point != self) {
      best = std::min(best, (q - (*pts_)[nd.point]).norm());
    }
    const double delta = q[nd.axis] - (*pts_)[nd.point][nd.axis];
    const int near = delta < 0 ? nd.left : nd.right;
    const int far = delta < 0 ? nd.right : nd.left;
    query(near, q, self, best);
    if (std::abs(delta) < best) query(far, q, self, best);
  }

  const std::vector<Eigen::VectorXd>* pts_;
  int dim_;
  int root_ = -1;
  std::vector<Node> nodes_;
};

}  // namespace

double knn_entropy_oracle(const std::vector<AlgebraVector>& samples) {
  if (samples.size() < 1000) {
    throw InsufficientSamples("nearest-neighbor entropy needs >= 1000 samples, got " +
                              std::to_string(samples.size()));
  }
  const LieGroupModel model = samples.front().model;
  const int l = model.dim();
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.model != model) {
      throw ModelMismatch("all samples must share one group model");
    }
    pts.push_back(s.coords);
  }
  const KdTree tree(pts);
  const std::size_t n = pts.size();
  double log_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = tree.nn_distance(static_cast<int>(i));
    if (!(d > 0.0)) {
      throw InsufficientSamples(
          "coincident sample points break the nearest-neighbor estimator");
    }
    log_sum += std::log(d);
  }
  const double unit_ball =
      std::pow(M_PI, 0.5 * l) / std::tgamma(0.5 * l + 1.0);
  double h = l * log_sum / static_cast<double>(n) + std::log(unit_ball) +
             kEulerMascheroni + std::log(static_cast<double>(n - 1));
  if (!model.unit_jacobian()) {
    double jac_sum = 0.0;
    for (const auto& s : samples) jac_sum += std::log(chart_jacobian(s));
    h -= jac_sum / static_cast<double>(n);
  }
  return h;
}

}  // namespace liewalk
