#include "bisdp/npkl.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace bisdp {

ConstraintSet::ConstraintSet(std::size_t n, const std::vector<Link>& links) : n_(n) {
  if (n == 0) throw std::invalid_argument("ConstraintSet: n must be >= 1");
  std::map<std::pair<std::size_t, std::size_t>, double> unordered;
  for (const Link& link : links) {
    if (link.a >= n || link.b >= n) {
      throw std::invalid_argument("ConstraintSet: index out of range");
    }
    if (link.a == link.b) {
      throw std::invalid_argument("ConstraintSet: link on the diagonal (" +
                                  std::to_string(link.a) + ")");
    }
    if (link.target != 0.0 && link.target != 1.0) {
      throw std::invalid_argument("ConstraintSet: link target must be 0 or 1");
    }
    const auto key = std::minmax(link.a, link.b);
    auto [it, inserted] = unordered.emplace(key, link.target);
    if (!inserted && it->second != link.target) {
      throw std::invalid_argument("ConstraintSet: conflicting targets for pair (" +
                                  std::to_string(key.first) + ", " +
                                  std::to_string(key.second) + ")");
    }
  }
  pairs_.reserve(n + 2 * unordered.size());
  for (std::size_t i = 0; i < n; ++i) pairs_.push_back({i, i, 1.0, PairKind::kDiagonal});
  for (const auto& [key, target] : unordered) {
    const PairKind kind = target == 1.0 ? PairKind::kMust : PairKind::kCannot;
    pairs_.push_back({key.first, key.second, target, kind});
    pairs_.push_back({key.second, key.first, target, kind});
    (kind == PairKind::kMust ? must_ : cannot_) += 1;
  }
}

NpklProblem::NpklProblem(ConstraintSet constraints, SparseSymmetric laplacian,
                         double lambda)
    : constraints_(std::move(constraints)),
      laplacian_(std::move(laplacian)),
      lambda_(lambda),
      // Stored pairs are distinct, so the vec(S_ji) are distinct unit vectors
      // and P is a 0/1 diagonal projector.
      pattern_norm_(1.0) {
  if (laplacian_.dim() != constraints_.n()) {
    throw std::invalid_argument("NpklProblem: Laplacian dimension does not match n");
  }
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("NpklProblem: lambda must be >= 0");
}

void NpklProblem::check_shapes(const Factor& A, const Factor& B) const {
  if (A.rows() != B.rows() || A.cols() != B.cols() ||
      static_cast<std::size_t>(A.rows()) != dim()) {
    throw std::invalid_argument("NpklProblem: factor shape mismatch");
  }
}

std::vector<double> NpklProblem::residuals(const Factor& A, const Factor& B) const {
  const auto& pairs = constraints_.pairs();
  std::vector<double> r(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    r[p] = A.row(pairs[p].j).dot(B.row(pairs[p].i)) - pairs[p].target;
  }
  return r;
}

double NpklProblem::objective(const Factor& X, const Factor& Y) const {
  check_shapes(X, Y);
  double fit = 0.0;
  for (double r : residuals(X, Y)) fit += r * r;
  double value = 0.5 * fit;
  if (lambda_ != 0.0) value += lambda_ * laplacian_.trace_form(X, Y);
  return value;
}

Factor NpklProblem::grad_x(const Factor& X, const Factor& Y) const {
  check_shapes(X, Y);
  const auto& pairs = constraints_.pairs();
  const std::vector<double> r = residuals(X, Y);
  Factor G = lambda_ != 0.0 ? Factor(lambda_ * laplacian_.multiply(Y))
                            : Factor(Factor::Zero(Y.rows(), Y.cols()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    G.row(pairs[p].j) += r[p] * Y.row(pairs[p].i);
  }
  return G;
}

Factor NpklProblem::grad_y(const Factor& X, const Factor& Y) const {
  check_shapes(X, Y);
  const auto& pairs = constraints_.pairs();
  const std::vector<double> r = residuals(X, Y);
  Factor G = lambda_ != 0.0 ? Factor(lambda_ * laplacian_.multiply(X))
                            : Factor(Factor::Zero(X.rows(), X.cols()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    G.row(pairs[p].i) += r[p] * X.row(pairs[p].j);
  }
  return G;
}

double NpklProblem::quad_form_x(const Factor& D, const Factor& Y) const {
  check_shapes(D, Y);
  double acc = 0.0;
  for (const auto& p : constraints_.pairs()) {
    const double v = D.row(p.j).dot(Y.row(p.i));
    acc += v * v;
  }
  return acc;
}

double NpklProblem::quad_form_y(const Factor& X, const Factor& D) const {
  check_shapes(X, D);
  double acc = 0.0;
  for (const auto& p : constraints_.pairs()) {
    const double v = X.row(p.j).dot(D.row(p.i));
    acc += v * v;
  }
  return acc;
}

double NpklProblem::lipschitz_x(const Factor& Y) const {
  return pattern_norm_ * pattern_norm_ * spectral_norm_sq_upper(Y);
}

double NpklProblem::lipschitz_y(const Factor& X) const { return lipschitz_x(X); }

double NpklProblem::dense_value(const Eigen::MatrixXd& Z) const {
  if (static_cast<std::size_t>(Z.rows()) != dim() || Z.rows() != Z.cols()) {
    throw std::invalid_argument("NpklProblem::dense_value: shape mismatch");
  }
  double fit = 0.0;
  for (const auto& p : constraints_.pairs()) {
    const double r = Z(p.j, p.i) - p.target;
    fit += r * r;
  }
  double value = 0.5 * fit;
  if (lambda_ != 0.0) {
    for (const auto& e : laplacian_.entries()) value += lambda_ * Z(e.col, e.row) * e.weight;
  }
  return value;
}

Eigen::MatrixXd NpklProblem::dense_gradient(const Eigen::MatrixXd& Z) const {
  if (static_cast<std::size_t>(Z.rows()) != dim() || Z.rows() != Z.cols()) {
    throw std::invalid_argument("NpklProblem::dense_gradient: shape mismatch");
  }
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Z.rows(), Z.cols());
  for (const auto& p : constraints_.pairs()) G(p.j, p.i) += Z(p.j, p.i) - p.target;
  if (lambda_ != 0.0) {
    for (const auto& e : laplacian_.entries()) G(e.row, e.col) += lambda_ * e.weight;
  }
  return G;
}

}  // namespace bisdp
