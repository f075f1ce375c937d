#include "bisdp/cluster.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace bisdp {

std::size_t Partition::cluster_count() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

Partition partition_from_labels(const std::vector<int>& labels) {
  std::map<int, std::size_t> ids;
  Partition p;
  p.labels.reserve(labels.size());
  for (int v : labels) {
    auto [it, inserted] = ids.emplace(v, ids.size());
    p.labels.push_back(it->second);
  }
  return p;
}

double rand_index(const Partition& pred, const Partition& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("rand_index: partitions have different lengths");
  }
  const std::size_t n = pred.size();
  if (n < 2) throw std::invalid_argument("rand_index: need at least two points");
  const std::size_t kp = pred.cluster_count();
  const std::size_t kt = truth.cluster_count();
  std::vector<double> table(kp * kt, 0.0), rows(kp, 0.0), cols(kt, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    table[pred.labels[i] * kt + truth.labels[i]] += 1.0;
    rows[pred.labels[i]] += 1.0;
    cols[truth.labels[i]] += 1.0;
  }
  auto pairs = [](double m) { return 0.5 * m * (m - 1.0); };
  double both = 0.0, same_pred = 0.0, same_truth = 0.0;
  for (double m : table) both += pairs(m);
  for (double m : rows) same_pred += pairs(m);
  for (double m : cols) same_truth += pairs(m);
  const double total = pairs(static_cast<double>(n));
  // a = both; b = total - same_pred - same_truth + both
  return (total - same_pred - same_truth + 2.0 * both) / total;
}

KMeansState empty_cluster_repair(KMeansState state) {
  const std::size_t n = state.labels.size();
  std::vector<std::size_t> sizes(state.k, 0);
  for (std::size_t l : state.labels) ++sizes[l];
  for (std::size_t c = 0; c < state.k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t pick = n;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sizes[state.labels[i]] > 1 && state.own_distance[i] > far) {
        far = state.own_distance[i];
        pick = i;
      }
    }
    if (pick == n) break;  // k > n; callers reject this earlier
    --sizes[state.labels[pick]];
    state.labels[pick] = c;
    sizes[c] = 1;
    state.own_distance[pick] = 0.0;
  }
  return state;
}

namespace {

class DenseKernel {
 public:
  explicit DenseKernel(const DenseSymmetric& K) : K_(K) {}
  std::size_t n() const { return static_cast<std::size_t>(K_.rows()); }
  double pair_distance(std::size_t i, std::size_t j) const {
    return K_(i, i) + K_(j, j) - 2.0 * K_(i, j);
  }
  Eigen::MatrixXd distances(const std::vector<std::size_t>& labels, std::size_t k) const {
    const auto nn = K_.rows();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nn, static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < nn; ++i) A(i, labels[i]) = 1.0;
    const Eigen::VectorXd sizes = A.colwise().sum().transpose();
    const Eigen::MatrixXd S = K_ * A;
    const Eigen::VectorXd within = (A.array() * S.array()).colwise().sum().transpose();
    Eigen::MatrixXd D(nn, static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < D.cols(); ++c) {
      const double m = sizes[c];
      if (m == 0.0) {
        D.col(c).setConstant(std::numeric_limits<double>::infinity());
        continue;
      }
      for (Eigen::Index i = 0; i < nn; ++i) {
        D(i, c) = std::max(0.0, K_(i, i) - 2.0 * S(i, c) / m + within[c] / (m * m));
      }
    }
    return D;
  }

 private:
  const DenseSymmetric& K_;
};

class FactorKernel {
 public:
  explicit FactorKernel(const Factor& F) : F_(F) {}
  std::size_t n() const { return static_cast<std::size_t>(F_.rows()); }
  double pair_distance(std::size_t i, std::size_t j) const {
    return (F_.row(i) - F_.row(j)).squaredNorm();
  }
  Eigen::MatrixXd distances(const std::vector<std::size_t>& labels, std::size_t k) const {
    const auto kk = static_cast<Eigen::Index>(k);
    Factor centroids = Factor::Zero(kk, F_.cols());
    Eigen::VectorXd sizes = Eigen::VectorXd::Zero(kk);
    for (Eigen::Index i = 0; i < F_.rows(); ++i) {
      centroids.row(labels[i]) += F_.row(i);
      sizes[labels[i]] += 1.0;
    }
    Eigen::MatrixXd D(F_.rows(), kk);
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (sizes[c] == 0.0) {
        D.col(c).setConstant(std::numeric_limits<double>::infinity());
        continue;
      }
      centroids.row(c) /= sizes[c];
      for (Eigen::Index i = 0; i < F_.rows(); ++i) {
        D(i, c) = (F_.row(i) - centroids.row(c)).squaredNorm();
      }
    }
    return D;
  }

 private:
  const Factor& F_;
};

template <typename Kernel>
std::vector<std::size_t> farthest_first(const Kernel& kernel, std::size_t k,
                                        std::size_t first) {
  const std::size_t n = kernel.n();
  std::vector<std::size_t> centers{first};
  std::vector<double> gap(n);
  for (std::size_t i = 0; i < n; ++i) gap[i] = kernel.pair_distance(i, first);
  while (centers.size() < k) {
    const std::size_t next =
        static_cast<std::size_t>(std::max_element(gap.begin(), gap.end()) - gap.begin());
    centers.push_back(next);
    for (std::size_t i = 0; i < n; ++i) {
      gap[i] = std::min(gap[i], kernel.pair_distance(i, next));
    }
    gap[next] = -1.0;  // never pick the same point twice
  }
  return centers;
}

template <typename Kernel>
KMeansResult lloyd(const Kernel& kernel, std::size_t k, std::size_t first,
                   std::size_t max_iters) {
  const std::size_t n = kernel.n();
  const std::vector<std::size_t> centers = farthest_first(kernel, k, first);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double d = kernel.pair_distance(i, centers[c]);
      if (d < best) {
        best = d;
        labels[i] = c;
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) labels[centers[c]] = c;

  KMeansResult result;
  while (true) {
    const Eigen::MatrixXd D = kernel.distances(labels, k);
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) objective += D(i, labels[i]);
    result.history.push_back(objective);
    result.objective = objective;
    if (result.iterations >= max_iters) break;
    ++result.iterations;

    KMeansState state{labels, k, Eigen::VectorXd(n)};
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = labels[i];
      for (std::size_t c = 0; c < k; ++c) {
        if (D(i, c) < D(i, best)) best = c;
      }
      state.labels[i] = best;
      state.own_distance[i] = D(i, best);
    }
    state = empty_cluster_repair(std::move(state));
    if (state.labels == labels) break;
    labels = std::move(state.labels);
  }
  result.partition.labels = std::move(labels);
  return result;
}

template <typename Kernel>
KMeansResult run_restarts(const Kernel& kernel, const KMeansOptions& opts) {
  const std::size_t n = kernel.n();
  if (opts.k == 0) throw std::invalid_argument("kernel_kmeans: k must be >= 1");
  if (opts.k > n) throw std::invalid_argument("kernel_kmeans: k exceeds the number of points");
  if (opts.restarts == 0) throw std::invalid_argument("kernel_kmeans: restarts must be >= 1");
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  KMeansResult best;
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    KMeansResult run = lloyd(kernel, opts.k, pick(rng), opts.max_iters);
    run.best_restart = r;
    if (r == 0 || run.objective < best.objective) best = std::move(run);
  }
  return best;
}

}  // namespace

KMeansResult kernel_kmeans(const DenseSymmetric& K, const KMeansOptions& opts) {
  if (K.rows() != K.cols()) throw std::invalid_argument("kernel_kmeans: kernel must be square");
  return run_restarts(DenseKernel(K), opts);
}

KMeansResult kernel_kmeans_factor(const Factor& F, const KMeansOptions& opts) {
  return run_restarts(FactorKernel(F), opts);
}

}  // namespace bisdp
