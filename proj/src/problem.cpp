#include "bisdp/problem.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace bisdp {

namespace {

// Column-stacking vec index k -> (row, col) of an n x r matrix.
template <typename QuadForm>
Eigen::MatrixXd polarize(Eigen::Index n, Eigen::Index r, QuadForm&& q) {
  const Eigen::Index m = n * r;
  Eigen::VectorXd diag(m);
  Factor E = Factor::Zero(n, r);
  for (Eigen::Index k = 0; k < m; ++k) {
    E(k % n, k / n) = 1.0;
    diag(k) = q(E);
    E(k % n, k / n) = 0.0;
  }
  Eigen::MatrixXd H(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    H(a, a) = diag(a);
    for (Eigen::Index b = a + 1; b < m; ++b) {
      E(a % n, a / n) = 1.0;
      E(b % n, b / n) = 1.0;
      const double both = q(E);
      E(a % n, a / n) = 0.0;
      E(b % n, b / n) = 0.0;
      H(a, b) = H(b, a) = 0.5 * (both - diag(a) - diag(b));
    }
  }
  return H;
}

}  // namespace

Eigen::MatrixXd explicit_hessian_x(const BiconvexQuadraticProblem& problem,
                                   const Factor& Y) {
  return polarize(Y.rows(), Y.cols(),
                  [&](const Factor& D) { return problem.quad_form_x(D, Y); });
}

Eigen::MatrixXd explicit_hessian_y(const BiconvexQuadraticProblem& problem,
                                   const Factor& X) {
  return polarize(X.rows(), X.cols(),
                  [&](const Factor& D) { return problem.quad_form_y(X, D); });
}

CurvatureBounds hessian_extremes(const Eigen::MatrixXd& hessian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("hessian_extremes: eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = eig.eigenvalues();
  return {ev(ev.size() - 1), std::max(ev(0), 0.0)};
}

Factor quadratic_factorization_gradient(const BiconvexQuadraticProblem& problem,
                                        const Factor& X) {
  return problem.grad_x(X, X) + problem.grad_y(X, X);
}

}  // namespace bisdp
