#include "bisdp/linalg.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace bisdp {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

std::string coord(std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << "(" << i << ", " << j << ")";
  return os.str();
}

}  // namespace

SparseSymmetric::SparseSymmetric(std::size_t dim,
                                 const std::vector<SparseEntry>& entries) {
  std::vector<SparseEntry> sorted = entries;
  for (const auto& e : sorted) {
    if (e.row >= dim || e.col >= dim) {
      throw std::invalid_argument("SparseSymmetric: index out of range at " +
                                  coord(e.row, e.col));
    }
    if (!std::isfinite(e.weight)) {
      throw std::invalid_argument("SparseSymmetric: non-finite weight at " +
                                  coord(e.row, e.col));
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].row == sorted[k - 1].row && sorted[k].col == sorted[k - 1].col) {
      throw std::invalid_argument("SparseSymmetric: duplicate coordinate " +
                                  coord(sorted[k].row, sorted[k].col));
    }
  }
  for (const auto& e : sorted) {
    if (e.row == e.col) continue;
    const SparseEntry mirror{e.col, e.row, e.weight};
    auto it = std::lower_bound(sorted.begin(), sorted.end(), mirror,
                          [](const SparseEntry& a, const SparseEntry& b) {
                            return a.row != b.row ? a.row < b.row : a.col < b.col;
                          });
    if (it == sorted.end() || it->row != mirror.row || it->col != mirror.col ||
        it->weight != e.weight) {
      throw std::invalid_argument("SparseSymmetric: asymmetric entry at " +
                                  coord(e.row, e.col));
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(sorted.size());
  for (const auto& e : sorted) {
    triplets.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.weight);
  }
  matrix_.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();
}

SparseSymmetric SparseSymmetric::from_triangle(std::size_t dim,
                                               const std::vector<SparseEntry>& entries) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * entries.size());
  for (const auto& e : entries) {
    if (e.row >= dim || e.col >= dim) {
      throw std::invalid_argument("SparseSymmetric: index out of range at " +
                                  coord(e.row, e.col));
    }
    triplets.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.weight);
    if (e.row != e.col) {
      triplets.emplace_back(static_cast<int>(e.col), static_cast<int>(e.row), e.weight);
    }
  }
  SpMat m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return SparseSymmetric(std::move(m));
}

std::vector<SparseEntry> SparseSymmetric::entries() const {
  std::vector<SparseEntry> out;
  out.reserve(nnz());
  for (Eigen::Index i = 0; i < matrix_.outerSize(); ++i) {
    for (SpMat::InnerIterator it(matrix_, i); it; ++it) {
      out.push_back({static_cast<std::size_t>(it.row()),
                     static_cast<std::size_t>(it.col()), it.value()});
    }
  }
  return out;
}

double SparseSymmetric::coeff(std::size_t i, std::size_t j) const {
  return matrix_.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

Factor SparseSymmetric::multiply(const Factor& B) const {
  if (static_cast<std::size_t>(B.rows()) != dim()) {
    throw std::invalid_argument("SparseSymmetric::multiply: shape mismatch");
  }
  Factor out = Factor::Zero(B.rows(), B.cols());
  for (Eigen::Index i = 0; i < matrix_.outerSize(); ++i) {
    for (SpMat::InnerIterator it(matrix_, i); it; ++it) {
      out.row(i) += it.value() * B.row(it.col());
    }
  }
  return out;
}

Eigen::VectorXd SparseSymmetric::multiply(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != dim()) {
    throw std::invalid_argument("SparseSymmetric::multiply: shape mismatch");
  }
  return matrix_ * v;
}

double SparseSymmetric::trace_form(const Factor& A, const Factor& B) const {
  if (A.rows() != B.rows() || A.cols() != B.cols() ||
      static_cast<std::size_t>(A.rows()) != dim()) {
    throw std::invalid_argument("SparseSymmetric::trace_form: shape mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < matrix_.outerSize(); ++i) {
    for (SpMat::InnerIterator it(matrix_, i); it; ++it) {
      acc += it.value() * A.row(i).dot(B.row(it.col()));
    }
  }
  return acc;
}

Eigen::MatrixXd SparseSymmetric::to_dense() const { return Eigen::MatrixXd(matrix_); }

namespace detail {

Eigen::VectorXd power_start_vector(Eigen::Index dim) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(dim);
  if (dim > 0) v(0) += 0.5;  // breaks symmetric ties between equal eigenvalues
  return v.normalized();
}

}  // namespace detail

double spectral_norm(const Factor& M, const PowerIterationOptions& opts) {
  if (M.size() == 0) throw std::invalid_argument("spectral_norm: empty matrix");
  if (M.squaredNorm() == 0.0) throw std::invalid_argument("spectral_norm: zero matrix");
  // Work on the smaller Gram side; for an n x r factor this is r x r.
  const Eigen::MatrixXd gram = M.cols() <= M.rows()
                                   ? Eigen::MatrixXd(M.transpose() * M)
                                   : Eigen::MatrixXd(M * M.transpose());
  const double lambda = power_iteration_psd(
      [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return gram * v; },
      gram.rows(), opts);
  return std::sqrt(lambda);
}

double spectral_norm_sq_upper(const Factor& M, const PowerIterationOptions& opts) {
  const double frob = M.squaredNorm();
  if (frob == 0.0) return 0.0;
  const Eigen::MatrixXd gram = M.cols() <= M.rows()
                                   ? Eigen::MatrixXd(M.transpose() * M)
                                   : Eigen::MatrixXd(M * M.transpose());
  const double upper = power_iteration_upper(
      [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return gram * v; }, gram.rows(), opts);
  return std::min(upper, frob);
}

double spectral_norm(const SparseSymmetric& M, const PowerIterationOptions& opts) {
  if (M.nnz() == 0) throw std::invalid_argument("spectral_norm: zero matrix");
  const double lambda = power_iteration_psd(
      [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return M.multiply(M.multiply(v));
      },
      static_cast<Eigen::Index>(M.dim()), opts);
  return std::sqrt(lambda);
}

DenseSymmetric psd_project(const DenseSymmetric& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("psd_project: matrix not square");
  const DenseSymmetric sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("psd_project: eigendecomposition failed");
  }
  const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
  DenseSymmetric out =
      eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double frobenius_dist_sq(const Factor& A, const Factor& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw std::invalid_argument("frobenius_dist_sq: shape mismatch");
  }
  return (A - B).squaredNorm();
}

}  // namespace bisdp
