#pragma once

#include <cstddef>
#include <vector>

#include "bisdp/linalg.hpp"
#include "bisdp/problem.hpp"

namespace bisdp {

enum class PairKind { kMust, kCannot, kDiagonal };

/// An unordered link between two distinct points with target 1 (must) or 0
/// (cannot).
struct Link {
  std::size_t a;
  std::size_t b;
  double target;
};

/// Ordered pair (j, i) with target T_ji.
struct ConstraintPair {
  std::size_t j;
  std::size_t i;
  double target;
  PairKind kind;
};

/// Pair targets T over the index set M u C u {j = i}. Always symmetrically
/// closed and diagonal-complete; a pair never carries two targets.
class ConstraintSet {
 public:
  ConstraintSet(std::size_t n, const std::vector<Link>& links);

  std::size_t n() const { return n_; }
  const std::vector<ConstraintPair>& pairs() const { return pairs_; }
  std::size_t must_count() const { return must_; }
  std::size_t cannot_count() const { return cannot_; }

 private:
  std::size_t n_;
  std::vector<ConstraintPair> pairs_;
  std::size_t must_ = 0;
  std::size_t cannot_ = 0;
};

/// Nonparametric kernel learning:
///   f(X, Y) = 1/2 sum_{(j,i) in T} (<X_j, Y_i> - T_ji)^2 + lambda tr(X^T Delta Y).
/// Every ordered occurrence in the constraint set contributes one residual.
/// Nothing of size (n r)^2 is ever formed; all operations are
/// O(|T| r + nnz(Delta) r).
class NpklProblem final : public BiconvexQuadraticProblem, public DenseSdpObjective {
 public:
  NpklProblem(ConstraintSet constraints, SparseSymmetric laplacian, double lambda);

  std::size_t dim() const override { return constraints_.n(); }

  double objective(const Factor& X, const Factor& Y) const override;
  Factor grad_x(const Factor& X, const Factor& Y) const override;
  Factor grad_y(const Factor& X, const Factor& Y) const override;
  double quad_form_x(const Factor& D, const Factor& Y) const override;
  double quad_form_y(const Factor& X, const Factor& D) const override;
  /// ||P||^2 ||Y||_2^2
  double lipschitz_x(const Factor& Y) const override;
  double lipschitz_y(const Factor& X) const override;

  double dense_value(const Eigen::MatrixXd& Z) const override;
  Eigen::MatrixXd dense_gradient(const Eigen::MatrixXd& Z) const override;

  const ConstraintSet& constraints() const { return constraints_; }
  const SparseSymmetric& laplacian() const { return laplacian_; }
  double lambda() const { return lambda_; }
  /// Spectral norm of P = sum vec(S_ji) vec(S_ji)^T.
  double pattern_norm() const { return pattern_norm_; }

 private:
  void check_shapes(const Factor& A, const Factor& B) const;
  /// R_ji = <A_j, B_i> - T_ji per stored pair.
  std::vector<double> residuals(const Factor& A, const Factor& B) const;

  ConstraintSet constraints_;
  SparseSymmetric laplacian_;
  double lambda_;
  double pattern_norm_;
};

}  // namespace bisdp
