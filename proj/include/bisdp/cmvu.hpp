#pragma once

#include <cstddef>
#include <vector>

#include "bisdp/linalg.hpp"
#include "bisdp/problem.hpp"

namespace bisdp {

struct NeighborPair {
  std::size_t i;
  std::size_t j;
  double distance_sq;
};

/// Neighbor pairs whose squared distances are to be preserved. Symmetrically
/// closed: (i, j, d) is stored iff (j, i, d) is.
class NeighborSet {
 public:
  NeighborSet(std::size_t n, const std::vector<NeighborPair>& pairs);

  std::size_t n() const { return n_; }
  /// Both orientations, sorted by (i, j).
  const std::vector<NeighborPair>& pairs() const { return pairs_; }
  /// One entry per unordered pair, with i < j.
  std::vector<NeighborPair> unordered() const;

 private:
  std::size_t n_;
  std::vector<NeighborPair> pairs_;
};

/// Colored maximum variance unfolding:
///   f(X, Y) = 1/2 sum_{i<j in N} (<X_i - X_j, Y_i - Y_j> - d_ij)^2
///             - lambda tr(Y^T Phi_c Phi_c^T X)
/// where Phi_c = H Phi is the centered label factor, so H L H = Phi_c Phi_c^T
/// is never formed.
class CmvuProblem final : public BiconvexQuadraticProblem, public DenseSdpObjective {
 public:
  CmvuProblem(const NeighborSet& neighbors, Factor centered_label_factor, double lambda);

  std::size_t dim() const override { return n_; }

  double objective(const Factor& X, const Factor& Y) const override;
  Factor grad_x(const Factor& X, const Factor& Y) const override;
  Factor grad_y(const Factor& X, const Factor& Y) const override;
  double quad_form_x(const Factor& D, const Factor& Y) const override;
  double quad_form_y(const Factor& X, const Factor& D) const override;
  /// ||P|| ||Y||_2^2 with P = sum vec(E E^T) vec(E E^T)^T over the pairs.
  double lipschitz_x(const Factor& Y) const override;
  double lipschitz_y(const Factor& X) const override;

  double dense_value(const Eigen::MatrixXd& Z) const override;
  Eigen::MatrixXd dense_gradient(const Eigen::MatrixXd& Z) const override;

  const std::vector<NeighborPair>& pairs() const { return pairs_; }
  const Factor& label_factor() const { return label_factor_; }
  double lambda() const { return lambda_; }
  double pattern_norm() const { return pattern_norm_; }

 private:
  void check_shapes(const Factor& A, const Factor& B) const;
  Factor gradient(const Factor& moving, const Factor& fixed) const;
  double quad_form(const Factor& D, const Factor& fixed) const;

  std::size_t n_;
  std::vector<NeighborPair> pairs_;  // unordered, i < j
  Factor label_factor_;
  double lambda_;
  double pattern_norm_;
};

/// lambda_max of the Gram matrix of the vec(E_ij E_ij^T) over unordered pairs,
/// i.e. the spectral norm of P. Computed once per problem.
double neighbor_pattern_norm(std::size_t n, const std::vector<NeighborPair>& unordered);

}  // namespace bisdp
