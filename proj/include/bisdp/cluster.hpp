#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bisdp/linalg.hpp"

namespace bisdp {

/// Cluster assignment; labels[i] in [0, k).
struct Partition {
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  /// 1 + max label (0 for an empty partition).
  std::size_t cluster_count() const;
};

/// Maps arbitrary class values to ids 0, 1, ... in order of first appearance.
Partition partition_from_labels(const std::vector<int>& labels);

/// Pair-agreement accuracy (a + b) / (n (n - 1) / 2), computed from the
/// contingency table in O(n + k_pred * k_truth).
double rand_index(const Partition& pred, const Partition& truth);

/// Lloyd state: assignment plus each point's kernel distance to the centroid
/// of its own cluster.
struct KMeansState {
  std::vector<std::size_t> labels;
  std::size_t k = 0;
  Eigen::VectorXd own_distance;
};

/// Every empty cluster takes the point farthest from its current centroid
/// (among points whose cluster keeps at least one other member). Lower index
/// wins ties. No-op when no cluster is empty.
KMeansState empty_cluster_repair(KMeansState state);

struct KMeansOptions {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  std::size_t restarts = 10;
};

struct KMeansResult {
  Partition partition;
  double objective = 0.0;  // total within-cluster kernel distance
  std::size_t iterations = 0;
  std::size_t best_restart = 0;
  /// Objective after each Lloyd iteration of the winning restart.
  std::vector<double> history;
};

/// Kernel k-means on an explicit PSD kernel.
KMeansResult kernel_kmeans(const DenseSymmetric& K, const KMeansOptions& opts);

/// Kernel k-means on K = F F^T without forming K.
KMeansResult kernel_kmeans_factor(const Factor& F, const KMeansOptions& opts);

}  // namespace bisdp
