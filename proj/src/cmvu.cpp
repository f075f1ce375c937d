#include "bisdp/cmvu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace bisdp {

NeighborSet::NeighborSet(std::size_t n, const std::vector<NeighborPair>& pairs) : n_(n) {
  std::map<std::pair<std::size_t, std::size_t>, double> closed;
  for (const NeighborPair& p : pairs) {
    if (p.i >= n || p.j >= n) throw std::invalid_argument("NeighborSet: index out of range");
    if (p.i == p.j) throw std::invalid_argument("NeighborSet: self pair");
    if (!std::isfinite(p.distance_sq) || p.distance_sq < 0.0) {
      throw std::invalid_argument("NeighborSet: distance must be finite and >= 0");
    }
    for (const auto& key : {std::make_pair(p.i, p.j), std::make_pair(p.j, p.i)}) {
      auto [it, inserted] = closed.emplace(key, p.distance_sq);
      if (!inserted && it->second != p.distance_sq) {
        throw std::invalid_argument("NeighborSet: conflicting distances for pair (" +
                                    std::to_string(p.i) + ", " + std::to_string(p.j) + ")");
      }
    }
  }
  pairs_.reserve(closed.size());
  for (const auto& [key, d] : closed) pairs_.push_back({key.first, key.second, d});
}

std::vector<NeighborPair> NeighborSet::unordered() const {
  std::vector<NeighborPair> out;
  out.reserve(pairs_.size() / 2);
  for (const auto& p : pairs_) {
    if (p.i < p.j) out.push_back(p);
  }
  return out;
}

double neighbor_pattern_norm(std::size_t n, const std::vector<NeighborPair>& unordered) {
  if (unordered.empty()) return 0.0;
  // <E_p E_p^T, E_q E_q^T> = (E_p^T E_q)^2: 4 on the diagonal, 1 when the two
  // pairs share exactly one endpoint.
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t p = 0; p < unordered.size(); ++p) {
    incident[unordered[p].i].push_back(p);
    incident[unordered[p].j].push_back(p);
  }
  const auto m = static_cast<Eigen::Index>(unordered.size());
  auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd out = 4.0 * v;
    for (Eigen::Index p = 0; p < m; ++p) {
      const auto& pair = unordered[static_cast<std::size_t>(p)];
      for (std::size_t endpoint : {pair.i, pair.j}) {
        for (std::size_t q : incident[endpoint]) {
          if (static_cast<Eigen::Index>(q) != p) out(p) += v(static_cast<Eigen::Index>(q));
        }
      }
    }
    return out;
  };
  PowerIterationOptions opts;
  opts.tol = 1e-10;
  opts.max_iters = 20000;
  try {
    return power_iteration_upper(apply, m, opts);
  } catch (const ConvergenceError&) {
    // Fall back to the Gershgorin bound, which is always valid.
    double bound = 0.0;
    for (const auto& pair : unordered) {
      bound = std::max(bound, 4.0 + static_cast<double>(incident[pair.i].size() - 1) +
                                  static_cast<double>(incident[pair.j].size() - 1));
    }
    return bound;
  }
}

CmvuProblem::CmvuProblem(const NeighborSet& neighbors, Factor centered_label_factor,
                         double lambda)
    : n_(neighbors.n()),
      pairs_(neighbors.unordered()),
      label_factor_(std::move(centered_label_factor)),
      lambda_(lambda),
      pattern_norm_(neighbor_pattern_norm(neighbors.n(), pairs_)) {
  if (static_cast<std::size_t>(label_factor_.rows()) != n_) {
    throw std::invalid_argument("CmvuProblem: label factor must have n rows");
  }
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("CmvuProblem: lambda must be >= 0");
  const Eigen::RowVectorXd sums = label_factor_.colwise().sum();
  if (sums.size() > 0 && sums.cwiseAbs().maxCoeff() > 1e-9 * std::max<double>(1.0, n_)) {
    throw std::invalid_argument("CmvuProblem: label factor columns must be centered");
  }
}

void CmvuProblem::check_shapes(const Factor& A, const Factor& B) const {
  if (A.rows() != B.rows() || A.cols() != B.cols() ||
      static_cast<std::size_t>(A.rows()) != n_) {
    throw std::invalid_argument("CmvuProblem: factor shape mismatch");
  }
}

double CmvuProblem::objective(const Factor& X, const Factor& Y) const {
  check_shapes(X, Y);
  double fit = 0.0;
  for (const auto& p : pairs_) {
    const double e = (X.row(p.i) - X.row(p.j)).dot(Y.row(p.i) - Y.row(p.j));
    fit += (e - p.distance_sq) * (e - p.distance_sq);
  }
  double value = 0.5 * fit;
  if (lambda_ != 0.0 && label_factor_.cols() > 0) {
    const Eigen::MatrixXd px = label_factor_.transpose() * X;
    const Eigen::MatrixXd py = label_factor_.transpose() * Y;
    value -= lambda_ * (px.array() * py.array()).sum();
  }
  return value;
}

Factor CmvuProblem::gradient(const Factor& moving, const Factor& fixed) const {
  Factor G = Factor::Zero(fixed.rows(), fixed.cols());
  for (const auto& p : pairs_) {
    const Eigen::RowVectorXd diff = fixed.row(p.i) - fixed.row(p.j);
    const double e = (moving.row(p.i) - moving.row(p.j)).dot(diff);
    const double r = e - p.distance_sq;
    G.row(p.i) += r * diff;
    G.row(p.j) -= r * diff;
  }
  if (lambda_ != 0.0 && label_factor_.cols() > 0) {
    G -= lambda_ * (label_factor_ * (label_factor_.transpose() * fixed));
  }
  return G;
}

Factor CmvuProblem::grad_x(const Factor& X, const Factor& Y) const {
  check_shapes(X, Y);
  return gradient(X, Y);
}

Factor CmvuProblem::grad_y(const Factor& X, const Factor& Y) const {
  check_shapes(X, Y);
  return gradient(Y, X);
}

double CmvuProblem::quad_form(const Factor& D, const Factor& fixed) const {
  double acc = 0.0;
  for (const auto& p : pairs_) {
    const double v = (D.row(p.i) - D.row(p.j)).dot(fixed.row(p.i) - fixed.row(p.j));
    acc += v * v;
  }
  return acc;
}

double CmvuProblem::quad_form_x(const Factor& D, const Factor& Y) const {
  check_shapes(D, Y);
  return quad_form(D, Y);
}

double CmvuProblem::quad_form_y(const Factor& X, const Factor& D) const {
  check_shapes(X, D);
  return quad_form(D, X);
}

double CmvuProblem::lipschitz_x(const Factor& Y) const {
  return pattern_norm_ * spectral_norm_sq_upper(Y);
}

double CmvuProblem::lipschitz_y(const Factor& X) const { return lipschitz_x(X); }

double CmvuProblem::dense_value(const Eigen::MatrixXd& Z) const {
  if (static_cast<std::size_t>(Z.rows()) != n_ || Z.rows() != Z.cols()) {
    throw std::invalid_argument("CmvuProblem::dense_value: shape mismatch");
  }
  double fit = 0.0;
  for (const auto& p : pairs_) {
    const double e = Z(p.i, p.i) + Z(p.j, p.j) - Z(p.i, p.j) - Z(p.j, p.i);
    fit += (e - p.distance_sq) * (e - p.distance_sq);
  }
  double value = 0.5 * fit;
  if (lambda_ != 0.0 && label_factor_.cols() > 0) {
    value -= lambda_ * (label_factor_.transpose() * Z * label_factor_).trace();
  }
  return value;
}

Eigen::MatrixXd CmvuProblem::dense_gradient(const Eigen::MatrixXd& Z) const {
  if (static_cast<std::size_t>(Z.rows()) != n_ || Z.rows() != Z.cols()) {
    throw std::invalid_argument("CmvuProblem::dense_gradient: shape mismatch");
  }
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Z.rows(), Z.cols());
  for (const auto& p : pairs_) {
    const double r = Z(p.i, p.i) + Z(p.j, p.j) - Z(p.i, p.j) - Z(p.j, p.i) - p.distance_sq;
    G(p.i, p.i) += r;
    G(p.j, p.j) += r;
    G(p.i, p.j) -= r;
    G(p.j, p.i) -= r;
  }
  if (lambda_ != 0.0 && label_factor_.cols() > 0) {
    G -= lambda_ * (label_factor_ * label_factor_.transpose());
  }
  return G;
}

}  // namespace bisdp
