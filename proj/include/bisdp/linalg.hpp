#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bisdp {

/// n x r factor; row i is the representation of point i.
using Factor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense symmetric matrix. Only used at oracle / desk scale.
using DenseSymmetric = Eigen::MatrixXd;

/// Thrown when an iterative routine runs out of iterations. Carries the best
/// value reached so callers can decide whether it is usable.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate) {}
  double best_estimate() const { return best_estimate_; }

 private:
  double best_estimate_;
};

struct SparseEntry {
  std::size_t row;
  std::size_t col;
  double weight;
};

/// Symmetric sparse matrix. Symmetry is checked at construction: every stored
/// (i, j, w) must be matched by (j, i, w). Duplicate coordinates are rejected.
class SparseSymmetric {
 public:
  SparseSymmetric() = default;
  SparseSymmetric(std::size_t dim, const std::vector<SparseEntry>& entries);

  /// Builds from entries given for one triangle (or both); each off-diagonal
  /// (i, j, w) is mirrored to (j, i, w). Duplicates are summed.
  static SparseSymmetric from_triangle(std::size_t dim,
                                       const std::vector<SparseEntry>& entries);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t nnz() const { return static_cast<std::size_t>(matrix_.nonZeros()); }

  /// Entries in row-major order.
  std::vector<SparseEntry> entries() const;

  double coeff(std::size_t i, std::size_t j) const;

  /// this * B in O(nnz * cols).
  Factor multiply(const Factor& B) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const;

  /// tr(A^T M B) without forming M B densely beyond one product.
  double trace_form(const Factor& A, const Factor& B) const;

  Eigen::MatrixXd to_dense() const;

  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const {
    return matrix_;
  }

 private:
  explicit SparseSymmetric(Eigen::SparseMatrix<double, Eigen::RowMajor> m)
      : matrix_(std::move(m)) {}

  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix_;
};

struct PowerIterationOptions {
  double tol = 1e-6;
  std::size_t max_iters = 500;
};

/// Largest singular value by power iteration on M^T M (the smaller Gram side
/// for dense factors). Start vector is the normalized all-ones vector with a
/// fixed perturbation on index 0, so results are reproducible.
double spectral_norm(const Factor& M, const PowerIterationOptions& opts = {});
double spectral_norm(const SparseSymmetric& M,
                     const PowerIterationOptions& opts = {});

/// Power iteration for the top eigenvalue of a symmetric PSD matrix supplied
/// as a matrix-vector product.
template <typename Apply>
double power_iteration_psd(Apply&& apply, Eigen::Index dim,
                           const PowerIterationOptions& opts);

/// Upper estimate of the top eigenvalue of a symmetric PSD operator: the
/// power-iteration Rayleigh quotient mu plus the residual ||G v - mu v||.
/// This dominates lambda_max whenever v carries at least half its weight on
/// the top eigenvector, which convergence ensures in practice.
template <typename Apply>
double power_iteration_upper(Apply&& apply, Eigen::Index dim,
                             const PowerIterationOptions& opts);

/// Upper estimate of sigma_max(M)^2, never above ||M||_F^2.
double spectral_norm_sq_upper(const Factor& M, const PowerIterationOptions& opts = {});

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped).
DenseSymmetric psd_project(const DenseSymmetric& M);

/// sum_ij (A_ij - B_ij)^2
double frobenius_dist_sq(const Factor& A, const Factor& B);

namespace detail {
Eigen::VectorXd power_start_vector(Eigen::Index dim);
}  // namespace detail

namespace detail {

// Power iteration; returns the converged iterate.
template <typename Apply>
Eigen::VectorXd power_vector(Apply&& apply, Eigen::Index dim, const PowerIterationOptions& opts,
                             double& estimate) {
  if (opts.tol <= 0.0) throw std::invalid_argument("power iteration: tol must be > 0");
  Eigen::VectorXd v = power_start_vector(dim);
  estimate = 0.0;
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    Eigen::VectorXd w = apply(v);
    // ||G v|| with unit v is a lower bound on lambda_max that dominates the
    // Rayleigh quotient.
    const double next = w.norm();
    if (next == 0.0) {
      estimate = 0.0;
      return v;
    }
    v = w / next;
    const bool done = it > 0 && std::abs(next - estimate) <= opts.tol * next;
    estimate = next;
    if (done) return v;
  }
  throw ConvergenceError("power iteration did not converge", estimate);
}

}  // namespace detail

template <typename Apply>
double power_iteration_psd(Apply&& apply, Eigen::Index dim,
                           const PowerIterationOptions& opts) {
  double estimate = 0.0;
  detail::power_vector(apply, dim, opts, estimate);
  return estimate;
}

template <typename Apply>
double power_iteration_upper(Apply&& apply, Eigen::Index dim,
                             const PowerIterationOptions& opts) {
  double estimate = 0.0;
  const Eigen::VectorXd v = detail::power_vector(apply, dim, opts, estimate);
  if (estimate == 0.0) return 0.0;
  const Eigen::VectorXd w = apply(v);
  const double mu = v.dot(w);
  return mu + (w - mu * v).norm();
}

}  // namespace bisdp
