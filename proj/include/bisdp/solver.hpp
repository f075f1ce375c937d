#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bisdp/linalg.hpp"
#include "bisdp/problem.hpp"

namespace bisdp {

struct FactorPair {
  Factor X;
  Factor Y;
};

/// Degenerated FISTA sequence: t' = (1 + sqrt(1 + 4 t^2)) / 2, omega' = (t - 1) / t'.
struct MomentumState {
  double t_prev = 1.0;
  double t = 1.0;
  double omega = 0.0;
};

MomentumState momentum_update(const MomentumState& state);

enum class SigmaMode {
  /// sigma = 0 and L from the problem's Lipschitz estimate.
  kZero,
  /// L and sigma are the extreme eigenvalues of the explicitly built block
  /// Hessian. Only allowed when n * r is small.
  kExactSmallScale,
};

struct PenaltyOptions {
  bool enabled = true;
  double multiplier = 1.05;  // c > 1
  double floor = 1e-8;       // gamma_min
  SigmaMode sigma_mode = SigmaMode::kZero;
  /// Keep the running maximum of the per-half-step estimates.
  bool monotone = true;
  /// Largest n * r for which kExactSmallScale is accepted.
  std::size_t exact_max_size = 256;
};

/// Returns max(c * (L - sigma) / 4, gamma_min).
double estimate_gamma(double lipschitz, double sigma, const PenaltyOptions& opts);

/// Dynamic penalty: each half-step proposes estimate_gamma(...) and the
/// schedule keeps the running maximum, so gamma never decreases.
class PenaltySchedule {
 public:
  explicit PenaltySchedule(PenaltyOptions opts);

  /// Updates from curvature estimates of the block about to be stepped and
  /// returns the gamma to use.
  double update(double lipschitz, double sigma);
  double current() const { return gamma_; }
  const PenaltyOptions& options() const { return opts_; }

 private:
  PenaltyOptions opts_;
  double gamma_ = 0.0;
};

struct SolverConfig {
  std::size_t rank = 10;
  std::size_t max_iters = 2000;
  double rel_obj_tol = 1e-6;
  /// Convergence additionally requires ||X - Y||_F^2 <= residual_tol * ||X||_F^2.
  double residual_tol = 1e-6;
  /// Stop when both block gradients have Frobenius norm <= grad_tol.
  double grad_tol = 0.0;
  /// Consecutive iterations the relative change must stay below rel_obj_tol.
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  bool momentum_enabled = true;
  PenaltyOptions penalty;
};

struct TraceRecord {
  std::size_t iter = 0;
  double objective_F = 0.0;
  double objective_f = 0.0;
  double residual = 0.0;  // ||X - Y||_F^2
  double gamma = 0.0;
  double elapsed = 0.0;   // seconds since the solve started
};

enum class Termination {
  kRelativeChange,
  kGradient,
  kMaxIterations,
  kLineSearch,  // used by the quartic-line-search baseline
};

std::string to_string(Termination t);

struct SolveResult {
  FactorPair factors;
  std::vector<TraceRecord> trace;
  Termination termination = Termination::kMaxIterations;

  bool converged() const { return termination != Termination::kMaxIterations; }
  /// Z = Y Y^T.
  Eigen::MatrixXd kernel() const;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<TraceRecord> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<TraceRecord>& trace() const { return trace_; }

 private:
  std::vector<TraceRecord> trace_;
};

struct HalfStep {
  Factor next;
  double tau = 0.0;
  double direction_norm_sq = 0.0;  // ||D||_F^2
};

/// One accelerated step on the X block with exact line minimization:
///   Xh = X + omega (X - X_prev),  D = grad_x(Xh, Y) + gamma (Xh - Y),
///   tau = ||D||^2 / (q_x(D, Y) + gamma ||D||^2),  X' = Xh - tau D.
HalfStep half_step_x(const BiconvexQuadraticProblem& problem, const Factor& X,
                     const Factor& X_prev, const Factor& Y, double omega, double gamma);

/// Mirror of half_step_x for the Y block, with X fixed at X_new.
HalfStep half_step_y(const BiconvexQuadraticProblem& problem, const Factor& Y,
                     const Factor& Y_prev, const Factor& X_new, double omega,
                     double gamma);

/// X_0 = Y_0 with entries uniform in (-1/sqrt(r), 1/sqrt(r)).
FactorPair random_init(std::size_t n, std::size_t rank, std::uint64_t seed);

/// Alternating accelerated gradient descent on
///   F(X, Y; gamma) = f(X, Y) + gamma/2 ||X - Y||_F^2.
/// Throws DivergenceError if the objective becomes non-finite.
SolveResult aagd_solve(const BiconvexQuadraticProblem& problem, const SolverConfig& config,
                       std::optional<FactorPair> init = std::nullopt);

}  // namespace bisdp
