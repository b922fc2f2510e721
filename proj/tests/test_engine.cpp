#include <gtest/gtest.h>

#include <cmath>

#include "fotd/models/kuramoto_sivashinsky.hpp"
#include "fotd/models/rossler.hpp"
#include "fotd/oracle.hpp"
#include "support.hpp"

using namespace fotd;
using namespace fotd::testing;

namespace {

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST(ModesRhs, MatchesDenseTranscription) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Eigen::Index n = 3 + seed % 6, d = 1 + seed % 6;
    const Eigen::Index r = std::min<Eigen::Index>({n, d, 1 + static_cast<Eigen::Index>(seed % 3)});
    const Vector w = random_weights(n, seed);
    const DenseLinearModel m(random_matrix(n, n, seed + 1), random_matrix(n, d, seed + 2), w);
    const auto [basis, y] = random_state(n, d, r, w, seed + 3);
    const Vector v = Vector::Zero(n);
    const StageTime t = StageTime::at(0.0);
    EXPECT_LT(rel(modes_rhs(m, v, basis, y, t), dense_modes_rhs(m.a(), m.b(), basis.modes, y, w)), 1e-12);
    EXPECT_LT(rel(coeffs_rhs(m, v, basis, y, t), dense_coeffs_rhs(m.a(), m.b(), basis.modes, y, w)), 1e-12);
  }
}

TEST(ModesRhs, StaticSubspaceWithoutDynamics) {
  const Eigen::Index n = 6, d = 4, r = 2;
  const Vector w = Vector::Ones(n);
  const auto [basis, y] = random_state(n, d, r, w, 5);
  // F' = U Z keeps F' Y inside span(U).
  const DenseLinearModel m(Matrix::Zero(n, n), basis.modes * random_matrix(r, d, 6), w);
  EXPECT_LT(modes_rhs(m, Vector::Zero(n), basis, y, StageTime::at(0.0)).norm(), 1e-13);
}

TEST(ModesRhs, UnforcedReducesToOtd) {
  const Eigen::Index n = 6, d = 4, r = 2;
  const Vector w = random_weights(n, 7);
  const Matrix l = random_matrix(n, n, 8);
  const DenseLinearModel m(l, Matrix::Zero(n, d), w);
  const auto [basis, y] = random_state(n, d, r, w, 9);
  const Matrix expected = project_complement(basis, Matrix(l * basis.modes));
  EXPECT_LT(rel(modes_rhs(m, Vector::Zero(n), basis, y, StageTime::at(0.0)), expected), 1e-13);
}

TEST(ModesRhs, OrthogonalToTheSubspace) {
  const Eigen::Index n = 8, d = 5, r = 3;
  const Vector w = random_weights(n, 10);
  const DenseLinearModel m(random_matrix(n, n, 11), random_matrix(n, d, 12), w);
  const auto [basis, y] = random_state(n, d, r, w, 13);
  const Matrix du = modes_rhs(m, Vector::Zero(n), basis, y, StageTime::at(0.0));
  EXPECT_LT(weighted_inner(basis.modes, du, w).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CoeffsRhs, ZeroDynamicsGiveZero) {
  const Eigen::Index n = 5, d = 3, r = 2;
  const DenseLinearModel m(Matrix::Zero(n, n), Matrix::Zero(n, d), Vector::Ones(n));
  const auto [basis, y] = random_state(n, d, r, Vector::Ones(n), 14);
  EXPECT_EQ(coeffs_rhs(m, Vector::Zero(n), basis, y, StageTime::at(0.0)).norm(), 0.0);
}

TEST(CoeffsRhs, EigenvectorModesGrowIndependently) {
  const Eigen::Index n = 4, d = 3, r = 2;
  Vector lambda(n);
  lambda << -1.0, 0.5, 2.0, 3.0;
  const DenseLinearModel m(lambda.asDiagonal().toDenseMatrix(), Matrix::Zero(n, d), Vector::Ones(n));
  const Basis basis{Matrix::Identity(n, r), Vector::Ones(n)};
  const Matrix y = random_matrix(d, r, 15);
  const Matrix dy = coeffs_rhs(m, Vector::Zero(n), basis, y, StageTime::at(0.0));
  for (Eigen::Index k = 0; k < r; ++k) EXPECT_LT((dy.col(k) - lambda(k) * y.col(k)).norm(), 1e-14);
}

TEST(Initialize, FullRankRosslerReproducesEnsemble) {
  const RosslerModel m;
  const double dt = 1e-2;
  const FotdState s = initialize(m, 3, dt);
  const EnsembleState e = EnsembleStepper(m, dt, Integrator::rk4).step(zero_ensemble(m));
  EXPECT_LT((reconstruct(s) - e.sens).norm(), 1e-12 * e.sens.norm() + 1e-18);
  EXPECT_DOUBLE_EQ(s.t, dt);
}

TEST(Initialize, TruncatedRosslerErrorIsTrailingSingularValue) {
  const RosslerModel m;
  const double dt = 1e-2;
  const FotdState s = initialize(m, 2, dt);
  const EnsembleState e = EnsembleStepper(m, dt, Integrator::rk4).step(zero_ensemble(m));
  const Eigen::JacobiSVD<Matrix> svd(e.sens);
  EXPECT_NEAR((reconstruct(s) - e.sens).norm(), svd.singularValues()(2), 1e-12 * svd.singularValues()(0));
  EXPECT_LT(s.basis.orthonormality_defect(), 1e-12);
}

TEST(Initialize, RankOneKsEnsembleIsPaddedOrthonormally) {
  KsConfig cfg = KsConfig::preset("desk");
  cfg.warmup = 5.0;
  const KuramotoSivashinskyModel m(cfg);
  FotdOptions opt;
  opt.integrator = Integrator::etdrk4;
  const FotdState s = initialize(m, 3, cfg.dt, opt);
  EXPECT_EQ(s.rank(), 3);
  EXPECT_LT(s.basis.orthonormality_defect(), 1e-12);
  // Only the first forcing column has fired at t = dt.
  EXPECT_GT(s.coeffs.col(0).norm(), 0.0);
  EXPECT_EQ(s.coeffs.rightCols(2).norm(), 0.0);
  const FotdState again = initialize(m, 3, cfg.dt, opt);
  EXPECT_EQ((again.basis.modes - s.basis.modes).norm(), 0.0);

  const FotdState resolved = initialize_resolved(m, 3, cfg.dt, opt);
  EXPECT_GT(resolved.t, cfg.dt);
  const RankedDecomposition rd = rank_decomposition(resolved);
  EXPECT_GE(rd.singulars(2), opt.init_resolution * rd.singulars(0));
}

TEST(Initialize, RejectsZeroEnsembleAndBadRanks) {
  const Vector w = Vector::Ones(4);
  try {
    initialize_from_ensemble(Vector::Zero(4), Matrix::Zero(4, 3), 0.0, w, 2);
    FAIL() << "expected zero-ensemble error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_ensemble);
  }
  EXPECT_THROW(initialize_from_ensemble(Vector::Zero(4), Matrix::Ones(4, 3), 0.0, w, 4), ConfigError);
  EXPECT_THROW(initialize_from_ensemble(Vector::Zero(4), Matrix::Ones(4, 3), 0.0, w, 0), ConfigError);
}

TEST(Step, ZeroModelLeavesStateUnchanged) {
  const Eigen::Index n = 5, d = 3, r = 2;
  const DenseLinearModel m(Matrix::Zero(n, n), Matrix::Zero(n, d), Vector::Ones(n), Vector::Zero(d));
  FotdState s;
  std::tie(s.basis, s.coeffs) = random_state(n, d, r, Vector::Ones(n), 16);
  s.model_state = random_matrix(n, 1, 17);
  const FotdState next = step(s, m, 0.1);
  EXPECT_LT((next.basis.modes * next.coeffs.transpose() - s.basis.modes * s.coeffs.transpose()).norm(), 1e-14);
  EXPECT_EQ((next.model_state - s.model_state).norm(), 0.0);
  EXPECT_DOUBLE_EQ(next.t, 0.1);
}

TEST(Step, FullRankRosslerTracksOracleAtFifthOrderLocally) {
  const RosslerModel m;
  auto local_error = [&](double dt) {
    const FotdState s0 = initialize(m, 3, dt);
    const FotdState s1 = step(s0, m, dt);
    const EnsembleStepper oracle(m, dt, Integrator::rk4);
    const EnsembleState e = oracle.step(oracle.step(zero_ensemble(m)));
    return (reconstruct(s1) - e.sens).norm();
  };
  // The full-rank reduction is an exact change of variables, so one step
  // agrees with the full ensemble step far below the RK4 local error.
  EXPECT_LT(local_error(1e-2), 1e-12);
}

TEST(Step, OrthonormalityHoldsOverTenThousandSteps) {
  const RosslerModel m;
  const double dt = 1e-3;
  FotdState s = initialize(m, 2, dt);
  const FotdStepper stepper(m, dt, 2);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = stepper.step(s);
    worst = std::max(worst, s.basis.orthonormality_defect());
  }
  EXPECT_LT(worst, kOrthonormalityTolerance);
}

TEST(Step, NonFiniteStateIsReported) {
  const Eigen::Index n = 3, d = 2;
  const DenseLinearModel m(Matrix::Constant(n, n, std::nan("")), Matrix::Ones(n, d), Vector::Ones(n));
  FotdState s;
  std::tie(s.basis, s.coeffs) = random_state(n, d, 1, Vector::Ones(n), 18);
  s.model_state = Vector::Ones(n);
  EXPECT_THROW(step(s, m, 0.1), NonFiniteError);
}

TEST(RankDecomposition, OrthogonalCoefficientColumns) {
  FotdState s;
  s.basis = Basis{Matrix::Identity(4, 2), Vector::Ones(4)};
  s.coeffs = Matrix::Zero(3, 2);
  s.coeffs(0, 0) = 3.0;
  s.coeffs(1, 1) = 2.0;
  const RankedDecomposition rd = rank_decomposition(s);
  EXPECT_NEAR(rd.singulars(0), 3.0, 1e-14);
  EXPECT_NEAR(rd.singulars(1), 2.0, 1e-14);
  EXPECT_LT((rd.rotation.cwiseAbs() - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(RankDecomposition, MatchesSvdAndReconstructs) {
  FotdState s;
  std::tie(s.basis, s.coeffs) = random_state(10, 8, 3, random_weights(10, 19), 20);
  const RankedDecomposition rd = rank_decomposition(s);
  const TruncatedSvd svd = truncated_svd(s.coeffs, 3);
  EXPECT_LT((rd.singulars - svd.singular).norm(), 1e-12 * svd.singular(0));
  const Matrix back = rd.modes_ranked * rd.singulars.asDiagonal() * rd.coeffs_ranked.transpose();
  EXPECT_LT(rel(back, reconstruct(s)), 1e-10);
  EXPECT_NEAR(rd.energy_fractions.sum(), 1.0, 1e-12);
  for (bool ok : rd.reliable) EXPECT_TRUE(ok);
}

TEST(Reconstruct, SubsetsAndBounds) {
  FotdState s;
  std::tie(s.basis, s.coeffs) = random_state(6, 4, 2, Vector::Ones(6), 21);
  const Matrix one = reconstruct(s, std::vector<Eigen::Index>{0});
  EXPECT_LT((one - s.basis.modes * s.coeffs.row(0).transpose()).norm(), 1e-15);
  EXPECT_EQ(reconstruct(s, std::vector<Eigen::Index>{}).cols(), 0);
  EXPECT_THROW(reconstruct(s, std::vector<Eigen::Index>{4}), Error);
  EXPECT_LT((reconstruct(s) - s.basis.modes * s.coeffs.transpose()).norm(), 1e-15);
}

TEST(Reorthonormalize, StatePreservesProduct) {
  FotdState s;
  const Vector w = random_weights(7, 22);
  s.basis = Basis{random_matrix(7, 3, 23), w};
  s.coeffs = random_matrix(5, 3, 24);
  const Matrix before = reconstruct(s);
  reorthonormalize_state(s);
  EXPECT_LT(s.basis.orthonormality_defect(), 1e-13);
  EXPECT_LT(rel(reconstruct(s), before), 1e-13);
}

TEST(Equivalence, RotatedInitialStateStaysEquivalent) {
  const RosslerModel m;
  const double dt = 1e-3;
  const FotdState s0 = initialize(m, 2, dt);
  const double c = std::cos(0.7), sn = std::sin(0.7);
  Matrix rot(2, 2);
  rot << c, -sn, sn, c;
  FotdState a = s0, b = s0;
  b.basis.modes = s0.basis.modes * rot;
  b.coeffs = s0.coeffs * rot;
  const FotdStepper stepper(m, dt, 2);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    a = stepper.step(a);
    b = stepper.step(b);
    worst = std::max(worst, rel(reconstruct(b), reconstruct(a)));
  }
  EXPECT_LT(worst, 1e-8);
}
