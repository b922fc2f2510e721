#include <gtest/gtest.h>

#include <random>

#include "fotd/engine.hpp"
#include "fotd/linalg.hpp"

using namespace fotd;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

}  // namespace

TEST(WeightedInner, MatchesTripleLoop) {
  const Matrix u = random_matrix(7, 3, 1);
  const Matrix w = random_matrix(7, 4, 2);
  const Vector q = random_matrix(7, 1, 3).cwiseAbs();
  const Matrix got = weighted_inner(u, w, q);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 7; ++k) s += u(k, i) * q(k) * w(k, j);
      EXPECT_NEAR(got(i, j), s, 1e-13);
    }
  }
}

TEST(WeightedInner, RejectsShapeMismatch) {
  EXPECT_THROW(weighted_inner(Matrix::Ones(3, 2), Matrix::Ones(4, 2), Vector::Ones(3)), Error);
  EXPECT_THROW(weighted_inner(Matrix::Ones(3, 2), Matrix::Ones(3, 2), Vector::Ones(4)), Error);
}

TEST(Reorthonormalize, ProducesWeightedOrthonormalBasisAndFactor) {
  const Matrix u = random_matrix(9, 4, 4);
  const Vector q = Vector::LinSpaced(9, 0.5, 2.0);
  const auto r = reorthonormalize_with_factor(u, q);
  EXPECT_LT(r.basis.orthonormality_defect(), 1e-13);
  EXPECT_LT((r.basis.modes * r.factor - u).norm(), 1e-12 * u.norm());
}

TEST(Reorthonormalize, DependentColumnsThrow) {
  Matrix u = random_matrix(6, 3, 5);
  u.col(2) = u.col(0) - 2.0 * u.col(1);
  EXPECT_THROW(reorthonormalize(u, Vector::Ones(6)), RankDeficientError);
}

TEST(RegularizedInverse, ClipsSmallEigenvalues) {
  Matrix c = Matrix::Zero(2, 2);
  c(0, 0) = 1.0;
  c(1, 1) = 1e-18;
  const Matrix inv = regularized_inverse(c, 1e-12);
  EXPECT_NEAR(inv(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(inv(1, 1) / 1e12, 1.0, 1e-10);
  EXPECT_NEAR(inv(0, 1), 0.0, 1e-6);
}

TEST(RegularizedInverse, ExactWhenWellConditioned) {
  const Matrix a = random_matrix(4, 4, 6);
  const Matrix c = a.transpose() * a + Matrix::Identity(4, 4);
  EXPECT_LT((regularized_inverse(c) * c - Matrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(TruncatedSvd, EckartYoungOnSixByFour) {
  const Matrix a = random_matrix(6, 4, 7);
  const Eigen::JacobiSVD<Matrix> ref(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (Eigen::Index r = 1; r <= 4; ++r) {
    const TruncatedSvd s = truncated_svd(a, r);
    const Matrix approx = s.left * s.singular.asDiagonal() * s.right.transpose();
    const double tail = ref.singularValues().tail(4 - r).norm();
    EXPECT_NEAR((a - approx).norm(), tail, 1e-12);
  }
}

TEST(TruncatedSvd, WeightedLeftVectorsAreOrthonormal) {
  const Matrix a = random_matrix(20, 5, 8);
  const Vector q = Vector::LinSpaced(20, 0.1, 3.0);
  const TruncatedSvd s = truncated_svd(a, 3, q);
  EXPECT_LT((weighted_inner(s.left, s.left, q) - Matrix::Identity(3, 3)).norm(), 1e-12);
  // Weighted Frobenius norm equals the singular-value norm.
  EXPECT_NEAR(weighted_norm(a, q), s.all_singular.norm(), 1e-11);
}

TEST(TruncatedSvd, LargeInputsUseDivideAndConquerConsistently) {
  const Matrix a = random_matrix(60, 30, 9);
  const TruncatedSvd s = truncated_svd(a, 5);
  const Eigen::JacobiSVD<Matrix> ref(a);
  EXPECT_LT((s.all_singular - ref.singularValues()).norm(), 1e-10);
}

TEST(ProjectComplement, AnnihilatesBasisDirections) {
  const Basis b = reorthonormalize(random_matrix(8, 2, 10), Vector::Ones(8));
  const Matrix w = random_matrix(8, 3, 11);
  const Matrix p = project_complement(b, w);
  EXPECT_LT(weighted_inner(b.modes, p, b.weights).norm(), 1e-13);
  EXPECT_LT((project_complement(b, p) - p).norm(), 1e-13);
}
