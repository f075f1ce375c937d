#include "bisdp/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bisdp {

double QuarticPoly::operator()(double tau) const {
  return (((c[4] * tau + c[3]) * tau + c[2]) * tau + c[1]) * tau + c[0];
}

double QuarticPoly::derivative(double tau) const {
  return ((4.0 * c[4] * tau + 3.0 * c[3]) * tau + 2.0 * c[2]) * tau + c[1];
}

namespace {

// Two Newton corrections on the original cubic; the closed form loses digits
// when roots are clustered.
double polish(double t, double c0, double c1, double c2, double c3) {
  for (int it = 0; it < 2; ++it) {
    const double p = ((c3 * t + c2) * t + c1) * t + c0;
    const double dp = (3.0 * c3 * t + 2.0 * c2) * t + c1;
    if (dp == 0.0) break;
    const double next = t - p / dp;
    if (!std::isfinite(next)) break;
    const double p_next = ((c3 * next + c2) * next + c1) * next + c0;
    if (std::abs(p_next) >= std::abs(p)) break;
    t = next;
  }
  return t;
}

std::vector<double> quadratic_roots(double c0, double c1, double c2) {
  if (c2 == 0.0) {
    if (c1 == 0.0) return {};
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return {};
  if (disc == 0.0) return {-c1 / (2.0 * c2)};
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  std::vector<double> roots;
  if (q != 0.0) {
    roots = {q / c2, c0 / q};
  } else {
    roots = {0.0};  // c1 == 0 and c0 == 0
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

std::vector<double> cubic_roots(double c0, double c1, double c2, double c3) {
  const double scale = std::max({std::abs(c0), std::abs(c1), std::abs(c2), std::abs(c3)});
  if (scale == 0.0) throw std::invalid_argument("cubic_roots: all coefficients are zero");
  if (std::abs(c3) <= 1e-14 * scale) return quadratic_roots(c0, c1, c2);

  const double a = c2 / c3;
  const double b = c1 / c3;
  const double c = c0 / c3;
  // t = x + a/3 gives x^3 + p x + q = 0.
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double half_q = 0.5 * q;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  const double disc_scale = half_q * half_q + std::abs(third_p * third_p * third_p);
  const double shift = -a / 3.0;

  std::vector<double> roots;
  if (std::abs(disc) <= 1e-12 * disc_scale) {
    if (std::abs(p) <= 1e-12 * std::max(1.0, a * a)) {
      roots = {shift};
    } else {
      roots = {3.0 * q / p + shift, -1.5 * q / p + shift};
    }
  } else if (disc > 0.0) {
    const double s = std::sqrt(disc);
    roots = {std::cbrt(-half_q + s) + std::cbrt(-half_q - s) + shift};
  } else {
    const double m = 2.0 * std::sqrt(-third_p);
    const double arg = std::clamp(3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
  }
  for (double& r : roots) r = polish(r, c0, c1, c2, c3);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

std::optional<double> minimize_quartic(const QuarticPoly& phi) {
  const auto& c = phi.c;
  if (c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0 && c[4] == 0.0) return std::nullopt;
  std::optional<double> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (double tau : cubic_roots(c[1], 2.0 * c[2], 3.0 * c[3], 4.0 * c[4])) {
    if (tau < 0.0) continue;
    const double v = phi(tau);
    if (v < best_value) {
      best_value = v;
      best = tau;
    }
  }
  return best;
}

QuarticPoly interpolate_quartic(const std::array<double, 5>& y, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("interpolate_quartic: h must be > 0");
  const double h2 = h * h;
  QuarticPoly phi;
  phi.c[0] = y[2];
  phi.c[1] = (y[0] - 8.0 * y[1] + 8.0 * y[3] - y[4]) / (12.0 * h);
  phi.c[2] = (-y[0] + 16.0 * y[1] - 30.0 * y[2] + 16.0 * y[3] - y[4]) / (24.0 * h2);
  phi.c[3] = (-y[0] + 2.0 * y[1] - 2.0 * y[3] + y[4]) / (12.0 * h2 * h);
  phi.c[4] = (y[0] - 4.0 * y[1] + 6.0 * y[2] - 4.0 * y[3] + y[4]) / (24.0 * h2 * h2);
  return phi;
}

SolveResult agd_xx_solve(const BiconvexQuadraticProblem& problem, const SolverConfig& config,
                         std::optional<Factor> init) {
  if (config.rank == 0) throw std::invalid_argument("agd_xx_solve: rank must be >= 1");
  if (config.rel_obj_tol <= 0.0) throw std::invalid_argument("agd_xx_solve: tol must be > 0");
  const std::size_t n = problem.dim();
  Factor X = init ? std::move(*init) : random_init(n, config.rank, config.seed).X;
  if (static_cast<std::size_t>(X.rows()) != n ||
      static_cast<std::size_t>(X.cols()) != config.rank) {
    throw std::invalid_argument("agd_xx_solve: initial factor does not match (n, rank)");
  }

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto g = [&](const Factor& A) { return problem.objective(A, A); };

  SolveResult result;
  result.termination = Termination::kMaxIterations;
  Factor X_prev = X;
  MomentumState momentum;
  double prev = std::numeric_limits<double>::quiet_NaN();
  std::size_t streak = 0;

  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    momentum = momentum_update(momentum);
    const double omega = config.momentum_enabled ? momentum.omega : 0.0;
    const Factor Xh = omega == 0.0 ? X : Factor(X + omega * (X - X_prev));
    const Factor G = quadratic_factorization_gradient(problem, Xh);
    if (!G.allFinite()) {
      throw DivergenceError("agd_xx_solve: non-finite gradient", std::move(result.trace));
    }
    const double gnorm = G.norm();

    double tau = 0.0;
    bool stop_line_search = false;
    if (gnorm > config.grad_tol && gnorm > 0.0) {
      const double h = std::max(Xh.norm(), 1.0) / gnorm;
      std::array<double, 5> samples{};
      for (int s = -2; s <= 2; ++s) samples[s + 2] = g(Xh - (s * h) * G);
      QuarticPoly phi = interpolate_quartic(samples, h);
      phi.c[1] = -gnorm * gnorm;
      const std::optional<double> best = minimize_quartic(phi);
      if (best) {
        tau = *best;
      } else {
        stop_line_search = true;
      }
    }

    X_prev = std::move(X);
    X = tau > 0.0 ? Factor(Xh - tau * G) : Xh;

    TraceRecord rec;
    rec.iter = k;
    rec.objective_f = g(X);
    rec.objective_F = rec.objective_f;
    rec.residual = 0.0;
    rec.gamma = 0.0;
    rec.elapsed = elapsed();
    result.trace.push_back(rec);
    if (!std::isfinite(rec.objective_F)) {
      throw DivergenceError("agd_xx_solve: objective became non-finite",
                            std::move(result.trace));
    }

    if (gnorm <= config.grad_tol) {
      result.termination = Termination::kGradient;
      break;
    }
    if (stop_line_search) {
      result.termination = Termination::kLineSearch;
      break;
    }
    if (k > 1) {
      const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
      streak = std::abs(rec.objective_F - prev) <= config.rel_obj_tol * scale ? streak + 1 : 0;
    }
    prev = rec.objective_F;
    if (streak >= config.patience) {
      result.termination = Termination::kRelativeChange;
      break;
    }
  }
  result.factors = {X, X};
  return result;
}

double projected_gradient_residual(const DenseSdpObjective& objective,
                                   const DenseSymmetric& Z) {
  return (Z - psd_project(Z - objective.dense_gradient(Z))).norm();
}

OracleResult psd_pg_oracle(const DenseSdpObjective& objective, const OracleStepRule& rule,
                           double tol, std::size_t max_iters) {
  if (!(tol > 0.0)) throw std::invalid_argument("psd_pg_oracle: tol must be > 0");
  if (!(rule.initial_step > 0.0) || !(rule.shrink > 0.0 && rule.shrink < 1.0) ||
      rule.grow < 1.0) {
    throw std::invalid_argument("psd_pg_oracle: invalid step rule");
  }
  const auto n = static_cast<Eigen::Index>(objective.dim());
  const auto start = std::chrono::steady_clock::now();

  OracleResult result;
  result.Z = DenseSymmetric::Zero(n, n);
  double value = objective.dense_value(result.Z);
  double eta = rule.initial_step;

  for (std::size_t k = 1; k <= max_iters; ++k) {
    const Eigen::MatrixXd grad = objective.dense_gradient(result.Z);
    DenseSymmetric next;
    double next_value = 0.0;
    while (true) {
      next = psd_project(result.Z - eta * grad);
      next_value = objective.dense_value(next);
      const Eigen::MatrixXd delta = next - result.Z;
      const double model = value + (grad.array() * delta.array()).sum() +
                           delta.squaredNorm() / (2.0 * eta);
      if (std::isfinite(next_value) && next_value <= model + 1e-15 * std::abs(value)) break;
      eta *= rule.shrink;
      if (eta < rule.min_step) {
        throw std::runtime_error("psd_pg_oracle: backtracking failed to find a step");
      }
    }
    // Only reachable within the rounding slack of the test above.
    if (next_value > value) {
      next = result.Z;
      next_value = value;
    }

    const double change = std::abs(value - next_value);
    result.Z = std::move(next);
    const double prev_value = value;
    value = next_value;
    result.iterations = k;

    TraceRecord rec;
    rec.iter = k;
    rec.objective_F = value;
    rec.objective_f = value;
    rec.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trace.push_back(rec);

    if (change <= tol * std::max(std::abs(prev_value), std::numeric_limits<double>::min())) {
      result.converged = true;
      break;
    }
    eta *= rule.grow;
  }
  return result;
}

}  // namespace bisdp
