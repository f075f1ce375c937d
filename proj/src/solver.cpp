#include "bisdp/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace bisdp {

MomentumState momentum_update(const MomentumState& state) {
  const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * state.t * state.t));
  return {state.t, next, (state.t - 1.0) / next};
}

double estimate_gamma(double lipschitz, double sigma, const PenaltyOptions& opts) {
  if (!(lipschitz >= sigma) || sigma < 0.0) {
    throw std::invalid_argument("estimate_gamma: requires L >= sigma >= 0");
  }
  return std::max(opts.multiplier * 0.25 * (lipschitz - sigma), opts.floor);
}

PenaltySchedule::PenaltySchedule(PenaltyOptions opts) : opts_(opts) {
  if (opts_.enabled && opts_.multiplier <= 1.0) {
    throw std::invalid_argument("PenaltySchedule: multiplier must exceed 1");
  }
  if (opts_.floor < 0.0) throw std::invalid_argument("PenaltySchedule: floor must be >= 0");
  gamma_ = opts_.enabled ? opts_.floor : 0.0;
}

double PenaltySchedule::update(double lipschitz, double sigma) {
  if (!opts_.enabled) return 0.0;
  const double proposal = estimate_gamma(lipschitz, sigma, opts_);
  gamma_ = opts_.monotone ? std::max(gamma_, proposal) : proposal;
  return gamma_;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kRelativeChange: return "relative_change";
    case Termination::kGradient: return "gradient";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kLineSearch: return "line_search";
  }
  return "unknown";
}

Eigen::MatrixXd SolveResult::kernel() const {
  return factors.Y * factors.Y.transpose();
}

namespace {

HalfStep exact_step(const Factor& extrapolated, const Factor& direction, double quad_form,
                    double gamma) {
  const double dn = direction.squaredNorm();
  if (dn == 0.0) return {extrapolated, 0.0, 0.0};
  const double denom = quad_form + gamma * dn;
  // Flat direction: nothing left to minimize in this block.
  if (!(denom > 0.0)) return {extrapolated, 0.0, dn};
  const double tau = dn / denom;
  return {extrapolated - tau * direction, tau, dn};
}

void require_same_shape(const Factor& a, const Factor& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

HalfStep half_step_x(const BiconvexQuadraticProblem& problem, const Factor& X,
                     const Factor& X_prev, const Factor& Y, double omega, double gamma) {
  require_same_shape(X, X_prev, "half_step_x");
  require_same_shape(X, Y, "half_step_x");
  const Factor Xh = omega == 0.0 ? X : Factor(X + omega * (X - X_prev));
  Factor D = problem.grad_x(Xh, Y);
  if (gamma != 0.0) D += gamma * (Xh - Y);
  if (!D.allFinite()) throw std::runtime_error("half_step_x: non-finite gradient");
  return exact_step(Xh, D, problem.quad_form_x(D, Y), gamma);
}

HalfStep half_step_y(const BiconvexQuadraticProblem& problem, const Factor& Y,
                     const Factor& Y_prev, const Factor& X_new, double omega,
                     double gamma) {
  require_same_shape(Y, Y_prev, "half_step_y");
  require_same_shape(Y, X_new, "half_step_y");
  const Factor Yh = omega == 0.0 ? Y : Factor(Y + omega * (Y - Y_prev));
  Factor D = problem.grad_y(X_new, Yh);
  if (gamma != 0.0) D += gamma * (Yh - X_new);
  if (!D.allFinite()) throw std::runtime_error("half_step_y: non-finite gradient");
  return exact_step(Yh, D, problem.quad_form_y(X_new, D), gamma);
}

FactorPair random_init(std::size_t n, std::size_t rank, std::uint64_t seed) {
  if (n == 0 || rank == 0) throw std::invalid_argument("random_init: empty shape");
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(rank));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Factor X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = dist(rng);
  }
  return {X, X};
}

SolveResult aagd_solve(const BiconvexQuadraticProblem& problem, const SolverConfig& config,
                       std::optional<FactorPair> init) {
  if (config.rank == 0) throw std::invalid_argument("aagd_solve: rank must be >= 1");
  if (config.rel_obj_tol <= 0.0 || config.residual_tol <= 0.0) {
    throw std::invalid_argument("aagd_solve: tolerances must be > 0");
  }
  const std::size_t n = problem.dim();
  FactorPair cur = init ? std::move(*init) : random_init(n, config.rank, config.seed);
  if (static_cast<std::size_t>(cur.X.rows()) != n ||
      static_cast<std::size_t>(cur.X.cols()) != config.rank) {
    throw std::invalid_argument("aagd_solve: initial factors do not match (n, rank)");
  }
  require_same_shape(cur.X, cur.Y, "aagd_solve");

  const bool exact = config.penalty.sigma_mode == SigmaMode::kExactSmallScale;
  if (exact && n * config.rank > config.penalty.exact_max_size) {
    throw std::invalid_argument("aagd_solve: exact curvature mode needs n*r <= " +
                                std::to_string(config.penalty.exact_max_size));
  }

  PenaltySchedule schedule(config.penalty);
  auto curvature_x = [&](const Factor& Y) -> CurvatureBounds {
    if (exact) return hessian_extremes(explicit_hessian_x(problem, Y));
    return {problem.lipschitz_x(Y), 0.0};
  };
  auto curvature_y = [&](const Factor& X) -> CurvatureBounds {
    if (exact) return hessian_extremes(explicit_hessian_y(problem, X));
    return {problem.lipschitz_y(X), 0.0};
  };

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  SolveResult result;
  Factor X_prev = cur.X;
  Factor Y_prev = cur.Y;
  MomentumState momentum;
  double prev_F = std::numeric_limits<double>::quiet_NaN();
  std::size_t streak = 0;

  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    momentum = momentum_update(momentum);
    const double omega = config.momentum_enabled ? momentum.omega : 0.0;

    const CurvatureBounds cx = curvature_x(cur.Y);
    const double gamma_half = schedule.update(cx.lipschitz, cx.strong_convexity);
    HalfStep sx = half_step_x(problem, cur.X, X_prev, cur.Y, omega, gamma_half);
    X_prev = std::move(cur.X);
    cur.X = std::move(sx.next);

    const CurvatureBounds cy = curvature_y(cur.X);
    const double gamma = schedule.update(cy.lipschitz, cy.strong_convexity);
    HalfStep sy = half_step_y(problem, cur.Y, Y_prev, cur.X, omega, gamma);
    Y_prev = std::move(cur.Y);
    cur.Y = std::move(sy.next);

    TraceRecord rec;
    rec.iter = k;
    rec.objective_f = problem.objective(cur.X, cur.Y);
    rec.residual = frobenius_dist_sq(cur.X, cur.Y);
    rec.gamma = gamma;
    rec.objective_F = rec.objective_f + 0.5 * gamma * rec.residual;
    rec.elapsed = elapsed();
    result.trace.push_back(rec);

    if (!std::isfinite(rec.objective_F)) {
      throw DivergenceError("aagd_solve: objective became non-finite at iteration " +
                                std::to_string(k),
                            std::move(result.trace));
    }

    if (std::sqrt(sx.direction_norm_sq) <= config.grad_tol &&
        std::sqrt(sy.direction_norm_sq) <= config.grad_tol) {
      result.termination = Termination::kGradient;
      break;
    }

    if (k > 1) {
      const double scale = std::max(std::abs(prev_F), std::numeric_limits<double>::min());
      streak = std::abs(rec.objective_F - prev_F) <= config.rel_obj_tol * scale ? streak + 1 : 0;
    }
    prev_F = rec.objective_F;
    if (streak >= config.patience &&
        rec.residual <= config.residual_tol * cur.X.squaredNorm()) {
      result.termination = Termination::kRelativeChange;
      break;
    }
  }
  result.factors = std::move(cur);
  return result;
}

}  // namespace bisdp
