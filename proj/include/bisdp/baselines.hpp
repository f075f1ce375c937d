#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "bisdp/linalg.hpp"
#include "bisdp/problem.hpp"
#include "bisdp/solver.hpp"

namespace bisdp {

/// phi(tau) = sum_k c[k] tau^k, k = 0..4.
struct QuarticPoly {
  std::array<double, 5> c{};

  double operator()(double tau) const;
  double derivative(double tau) const;
};

/// Distinct real roots, ascending, of c3 t^3 + c2 t^2 + c1 t + c0 = 0 by the
/// closed-form (Cardano / trigonometric) method. A vanishing leading
/// coefficient degrades to the quadratic or linear formula.
std::vector<double> cubic_roots(double c0, double c1, double c2, double c3);

/// Global minimizer of phi over the nonnegative critical points, or nullopt
/// when phi' has no nonnegative real root.
std::optional<double> minimize_quartic(const QuarticPoly& phi);

/// Recovers the quartic phi(tau) = g(X - tau G) exactly from five samples at
/// tau in {0, +-h, +-2h}.
QuarticPoly interpolate_quartic(const std::array<double, 5>& samples_m2_to_p2, double h);

/// Accelerated gradient descent on g(X) = f~(X X^T) with an exact quartic
/// line search every iteration. Uses the same momentum sequence and stopping
/// rule as aagd_solve; returned factors have X == Y.
SolveResult agd_xx_solve(const BiconvexQuadraticProblem& problem, const SolverConfig& config,
                         std::optional<Factor> init = std::nullopt);

struct OracleStepRule {
  double initial_step = 1.0;
  double shrink = 0.5;
  double grow = 1.25;
  double min_step = 1e-30;
};

struct OracleResult {
  DenseSymmetric Z;
  std::vector<TraceRecord> trace;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Projected gradient on Z with backtracking, Z <- psd_project(Z - eta grad),
/// from Z = 0 until the relative objective change drops below tol. Solves the
/// convex problem min_{Z psd} f~(Z) to ground truth at small n.
OracleResult psd_pg_oracle(const DenseSdpObjective& objective, const OracleStepRule& rule,
                           double tol, std::size_t max_iters = 200000);

/// ||Z - psd_project(Z - grad f~(Z))||_F, zero exactly at the optimum.
double projected_gradient_residual(const DenseSdpObjective& objective,
                                   const DenseSymmetric& Z);

}  // namespace bisdp
