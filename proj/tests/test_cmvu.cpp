#include <gtest/gtest.h>

#include <random>

#include "bisdp/cmvu.hpp"
#include "oracles.hpp"

using namespace bisdp;

namespace {

Factor col(std::initializer_list<double> v) {
  Factor F(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) F(i++, 0) = x;
  return F;
}

CmvuProblem two_points(double d) {
  return CmvuProblem(NeighborSet(2, {{0, 1, d}}), Factor::Zero(2, 1), 0.0);
}

Eigen::VectorXd vec(const Factor& F) {
  Eigen::MatrixXd c = F;
  return Eigen::Map<Eigen::VectorXd>(c.data(), c.size());
}

}  // namespace

TEST(NeighborSet, ClosureAndValidation) {
  NeighborSet s(3, {{0, 1, 1.0}, {2, 1, 4.0}});
  EXPECT_EQ(s.pairs().size(), 4u);
  EXPECT_EQ(s.unordered().size(), 2u);
  EXPECT_THROW(NeighborSet(3, {{0, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(NeighborSet(3, {{0, 1, -1.0}}), std::invalid_argument);
  EXPECT_THROW(NeighborSet(3, {{0, 1, 1.0}, {1, 0, 2.0}}), std::invalid_argument);
}

TEST(Cmvu, HandExamples) {
  Factor X = col({1, 0});
  EXPECT_DOUBLE_EQ(two_points(1.0).objective(X, X), 0.0);
  EXPECT_DOUBLE_EQ(two_points(0.0).objective(X, X), 0.5);
  Factor g = two_points(0.0).grad_x(X, X);
  EXPECT_DOUBLE_EQ(g(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g(1, 0), -1.0);
  EXPECT_DOUBLE_EQ(two_points(0.0).quad_form_x(col({1, 0}), col({1, 0})), 1.0);
  EXPECT_DOUBLE_EQ(two_points(0.0).quad_form_x(col({0, 0}), col({1, 0})), 0.0);
  EXPECT_DOUBLE_EQ(two_points(1.0).grad_x(X, X).norm(), 0.0);
}

TEST(Cmvu, SinglePairLipschitzBound) {
  // sigma_max(Y) = 1 -> bounded by 4 ||P||^2.
  CmvuProblem p = two_points(1.0);
  Factor Y = col({1, 0});
  EXPECT_LE(p.lipschitz_x(Y), 4.0 * p.pattern_norm() * p.pattern_norm() + 1e-9);
  EXPECT_NEAR(p.lipschitz_x(3.0 * Y), 9.0 * p.lipschitz_x(Y), 1e-8);
}

TEST(Cmvu, RejectsUncenteredFactor) {
  EXPECT_THROW(CmvuProblem(NeighborSet(2, {{0, 1, 1.0}}), Factor::Ones(2, 1), 1.0),
               std::invalid_argument);
}

TEST(Cmvu, MatchesDenseOracleAndSymmetry) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 10; ++t) {
    auto inst = oracle::random_cmvu(7, 5, 0.7, rng);
    CmvuProblem p = oracle::make_cmvu(inst);
    Factor X = oracle::random_factor(7, 3, rng), Y = oracle::random_factor(7, 3, rng);
    const Eigen::MatrixXd hlh = oracle::centered_label_kernel(inst.labels);
    const double dense = oracle::cmvu_dense(Eigen::MatrixXd(X) * Eigen::MatrixXd(Y).transpose(),
                                            inst.pairs, hlh, 0.7);
    EXPECT_NEAR(p.objective(X, Y), dense, 1e-10 * (1 + std::abs(dense)));
    EXPECT_NEAR(p.objective(X, Y), p.objective(Y, X), 1e-10 * (1 + std::abs(dense)));
    const Eigen::MatrixXd Z = Eigen::MatrixXd(Y) * Eigen::MatrixXd(Y).transpose();
    EXPECT_NEAR(p.dense_value(Z), oracle::cmvu_dense(Z, inst.pairs, hlh, 0.7), 1e-9 * (1 + std::abs(dense)));
  }
}

TEST(Cmvu, FiniteDifferenceGradients) {
  std::mt19937_64 rng(32);
  auto inst = oracle::random_cmvu(6, 4, 0.5, rng);
  CmvuProblem p = oracle::make_cmvu(inst);
  Factor X = oracle::random_factor(6, 2, rng), Y = oracle::random_factor(6, 2, rng);
  Factor fdx = oracle::fd_gradient([&](const Factor& A) { return p.objective(A, Y); }, X);
  Factor fdy = oracle::fd_gradient([&](const Factor& B) { return p.objective(X, B); }, Y);
  EXPECT_LE((fdx - p.grad_x(X, Y)).norm() / fdx.norm(), 1e-5);
  EXPECT_LE((fdy - p.grad_y(X, Y)).norm() / fdy.norm(), 1e-5);
  Eigen::MatrixXd Z = Eigen::MatrixXd(X) * Eigen::MatrixXd(X).transpose();
  Eigen::MatrixXd G = p.dense_gradient(Z);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      Eigen::MatrixXd up = Z, dn = Z;
      up(i, j) += 1e-6;
      dn(i, j) -= 1e-6;
      EXPECT_NEAR((p.dense_value(up) - p.dense_value(dn)) / 2e-6, G(i, j), 1e-5);
    }
}

TEST(Cmvu, QuadFormAndLipschitzAgainstExplicitHessian) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 10; ++t) {
    auto inst = oracle::random_cmvu(8, 6, 1.0, rng);
    CmvuProblem p = oracle::make_cmvu(inst);
    Factor Y = oracle::random_factor(8, 3, rng), D = oracle::random_factor(8, 3, rng);
    const Eigen::MatrixXd H = oracle::cmvu_hessian_x(inst.pairs, Y);
    const double q = vec(D).dot(H * vec(D));
    EXPECT_NEAR(p.quad_form_x(D, Y), q, 1e-10 * (1 + q));
    EXPECT_NEAR(p.quad_form_y(Y, D), q, 1e-10 * (1 + q));
    EXPECT_GE(p.lipschitz_x(Y), oracle::lambda_max(H) * (1 - 1e-9));
    const double s = 0.25;
    Factor X = oracle::random_factor(8, 3, rng);
    const double second = p.objective(X + s * D, Y) - 2 * p.objective(X, Y) + p.objective(X - s * D, Y);
    EXPECT_NEAR(second, s * s * p.quad_form_x(D, Y), 1e-8 * std::abs(second));
  }
}

TEST(Cmvu, LabelTermInvariantToTranslation) {
  std::mt19937_64 rng(34);
  auto inst = oracle::random_cmvu(6, 3, 1.0, rng);
  CmvuProblem p = oracle::make_cmvu(inst);
  Factor X = oracle::random_factor(6, 2, rng);
  Factor shifted = X;
  shifted.rowwise() += Eigen::RowVector2d(3.0, -2.0);
  EXPECT_NEAR(p.objective(X, X), p.objective(shifted, shifted), 1e-9 * (1 + std::abs(p.objective(X, X))));
  for (Eigen::Index c = 0; c < p.label_factor().cols(); ++c)
    EXPECT_LT(std::abs(p.label_factor().col(c).sum()), 1e-10);
}
