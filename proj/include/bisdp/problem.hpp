#pragma once

#include <cstddef>

#include "bisdp/linalg.hpp"

namespace bisdp {

/// A symmetric bilinear surrogate f(X, Y) = f~(X Y^T) of a convex quadratic
/// SDP objective. f is quadratic in X for fixed Y and vice versa. The Courant
/// penalty (gamma/2)||X - Y||_F^2 is not part of the problem; the solver adds
/// it.
///
/// Implementations must satisfy objective(X, Y) == objective(Y, X) and keep
/// both quadratic forms nonnegative. They are shared read-only across solver
/// runs, so every method is const and must not mutate state.
class BiconvexQuadraticProblem {
 public:
  virtual ~BiconvexQuadraticProblem() = default;

  /// Number of points n (rows of X and Y).
  virtual std::size_t dim() const = 0;

  virtual double objective(const Factor& X, const Factor& Y) const = 0;

  /// Gradient of f(. | Y) at X.
  virtual Factor grad_x(const Factor& X, const Factor& Y) const = 0;
  /// Gradient of f(X | .) at Y.
  virtual Factor grad_y(const Factor& X, const Factor& Y) const = 0;

  /// vec(D)^T H_x(Y) vec(D), where H_x(Y) is the Hessian of f(. | Y).
  virtual double quad_form_x(const Factor& D, const Factor& Y) const = 0;
  /// vec(D)^T H_y(X) vec(D), where H_y(X) is the Hessian of f(X | .).
  virtual double quad_form_y(const Factor& X, const Factor& D) const = 0;

  /// Upper estimates of lambda_max(H_x(Y)) and lambda_max(H_y(X)).
  virtual double lipschitz_x(const Factor& Y) const = 0;
  virtual double lipschitz_y(const Factor& X) const = 0;
};

/// f~(Z) evaluated on an explicit dense Z, for the projected-gradient oracle.
class DenseSdpObjective {
 public:
  virtual ~DenseSdpObjective() = default;
  virtual std::size_t dim() const = 0;
  virtual double dense_value(const Eigen::MatrixXd& Z) const = 0;
  virtual Eigen::MatrixXd dense_gradient(const Eigen::MatrixXd& Z) const = 0;
};

/// Dense Hessian of f(. | Y) over vec(X) (column stacking), recovered from
/// quad_form_x by polarization. O((n r)^2) quadratic-form evaluations; only
/// meant for small instances.
Eigen::MatrixXd explicit_hessian_x(const BiconvexQuadraticProblem& problem,
                                   const Factor& Y);
Eigen::MatrixXd explicit_hessian_y(const BiconvexQuadraticProblem& problem,
                                   const Factor& X);

struct CurvatureBounds {
  double lipschitz;
  double strong_convexity;
};

/// Extreme eigenvalues of a dense symmetric Hessian.
CurvatureBounds hessian_extremes(const Eigen::MatrixXd& hessian);

/// Gradient of the quadratic factorization g(X) = f~(X X^T), i.e.
/// grad_x(X, X) + grad_y(X, X).
Factor quadratic_factorization_gradient(const BiconvexQuadraticProblem& problem,
                                        const Factor& X);

}  // namespace bisdp
