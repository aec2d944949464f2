#include <gtest/gtest.h>

#include <random>

#include "giqn/jacobian_model.hpp"
#include "giqn/problems.hpp"
#include "support.hpp"

using namespace giqn;

namespace {

SparsityPattern random_pattern(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution keep(density);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i == j || keep(rng)) e.emplace_back(i, j);
  return SparsityPattern::from_entries(n, std::move(e));
}

Matrix random_matrix(std::mt19937_64& rng, int n) {
  Matrix m(n, n);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = d(rng);
  return m;
}

}  // namespace

TEST(FdJacobian, SmallNonlinearMap) {
  const ResidualFn F = [](const Vector& x) -> Vector { return Vector{{x[0] * x[0], x[1]}}; };
  const Vector x{{1.0, 1.0}};
  std::int64_t evals = 0;
  const Matrix J = fd_jacobian(F, x, F(x), nullptr, evals);
  EXPECT_EQ(evals, 2);
  EXPECT_LE((J - Matrix{{2.0, 0.0}, {0.0, 1.0}}).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FdJacobian, LinearMapIsRecovered) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 9;
    const Matrix A = random_matrix(rng, n) * 10.0;
    const ResidualFn F = [A](const Vector& x) -> Vector { return A * x; };
    const Vector x = test::uniform_vector(rng, n, -3.0, 3.0);
    std::int64_t evals = 0;
    const Matrix J = fd_jacobian(F, x, F(x), nullptr, evals);
    EXPECT_LE((J - A).norm(), 1e-7 * A.norm());
  }
}

TEST(FdJacobian, BroydenTridiagonalAgainstAnalytic) {
  const Problem p = make_problem("broyden_tridiagonal", 500);
  const Vector x = starting_point(p, 1.0);
  std::int64_t evals = 0;
  const auto pattern = p.structure();
  const Matrix J = fd_jacobian(p.F, x, p.evaluate(x), &pattern, evals);
  EXPECT_LE((J - p.jacobian(x)).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(FdJacobian, PatternZeroesStructuralEntries) {
  const ResidualFn F = [](const Vector& x) -> Vector { return Vector{{x[0] + x[1], x[1]}}; };
  const auto pattern = SparsityPattern::from_entries(2, {{0, 0}, {1, 1}});
  std::int64_t evals = 0;
  const Matrix J = fd_jacobian(F, Vector{{0.5, 0.5}}, F(Vector{{0.5, 0.5}}), &pattern, evals);
  EXPECT_EQ(J(0, 1), 0.0);
}

TEST(FdJacobian, NonFiniteResidualIsAnError) {
  const ResidualFn F = [](const Vector& x) -> Vector {
    return Vector{{x[0] > 1.0 ? NAN : x[0]}};
  };
  std::int64_t evals = 0;
  EXPECT_THROW(fd_jacobian(F, Vector{{1.0}}, Vector{{1.0}}, nullptr, evals), EvaluationError);
}

TEST(Schubert, ScalarBroyden) {
  Matrix M{{2.0}};
  schubert_update(M, SparsityPattern::dense(1), Vector{{1.0}}, Vector{{3.0}});
  EXPECT_EQ(M(0, 0), 3.0);
}

TEST(Schubert, SecantOnDenseInstances) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 100; ++t) {
    Matrix M = random_matrix(rng, 5);
    const Vector dx = test::uniform_vector(rng, 5, -1.0, 1.0);
    const Vector dF = test::uniform_vector(rng, 5, -1.0, 1.0);
    schubert_update(M, SparsityPattern::dense(5), dx, dF);
    EXPECT_LE((M * dx - dF).norm(), 1e-12 * (dF.norm() + M.norm() * dx.norm()));
  }
}

TEST(Schubert, KeepsExcludedEntryZero) {
  const auto pattern = SparsityPattern::from_entries(2, {{0, 0}, {1, 0}, {1, 1}});
  Matrix M{{1.0, 0.0}, {0.5, 2.0}};
  schubert_update(M, pattern, Vector{{1.0, 1.0}}, Vector{{4.0, -1.0}});
  EXPECT_EQ(M(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(M(0, 0), 4.0);
  EXPECT_NEAR(M.row(1).sum(), -1.0, 1e-15);
}

TEST(Schubert, RowsWithoutMaskedStepAreUnchanged) {
  const auto pattern = SparsityPattern::from_entries(2, {{0, 0}, {1, 1}});
  Matrix M{{1.0, 0.0}, {0.0, 2.0}};
  schubert_update(M, pattern, Vector{{0.0, 1.0}}, Vector{{7.0, 5.0}});
  EXPECT_EQ(M(0, 0), 1.0);
  EXPECT_EQ(M(1, 1), 5.0);
}

TEST(Schubert, DimensionMismatch) {
  Matrix M = Matrix::Identity(2, 2);
  EXPECT_THROW(schubert_update(M, SparsityPattern::dense(2), Vector::Ones(3), Vector::Ones(2)),
               DimensionMismatch);
}

TEST(BoglePerkins, PreservesSparsityAndSecant) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 200; ++t) {
    const int n = 3 + t % 8;
    const auto pattern = random_pattern(rng, n, 0.3);
    Matrix M = random_matrix(rng, n);
    pattern.mask(M);
    const Vector dx = test::uniform_vector(rng, n, -1.0, 1.0);
    const Vector dF = test::uniform_vector(rng, n, -1.0, 1.0);
    bogle_perkins_update(M, pattern, dx, dF);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!pattern.contains(i, j)) {
          ASSERT_EQ(M(i, j), 0.0);
        }
    EXPECT_LE((M * dx - dF).norm(), 1e-12 * (dF.norm() + M.norm() * dx.norm()));
  }
}

TEST(BoglePerkins, ScalesCorrectionByEntryMagnitude) {
  Matrix M{{4.0, 1.0}, {0.0, 1.0}};
  bogle_perkins_update(M, SparsityPattern::dense(2), Vector{{1.0, 1.0}}, Vector{{5.0 + 17.0, 1.0}});
  // Residual 17 split in proportion to M_ij^2 dx_j = (16, 1).
  EXPECT_DOUBLE_EQ(M(0, 0), 20.0);
  EXPECT_DOUBLE_EQ(M(0, 1), 2.0);
  EXPECT_EQ(M(1, 0), 0.0);
  EXPECT_EQ(M(1, 1), 1.0);
}

TEST(BoglePerkins, DegenerateRowsAreUnchanged) {
  const auto pattern = SparsityPattern::from_entries(2, {{0, 0}, {1, 1}});
  Matrix M{{3.0, 0.0}, {0.0, 2.0}};
  bogle_perkins_update(M, pattern, Vector{{1e-20, 1.0}}, Vector{{9.0, 4.0}});
  EXPECT_EQ(M(0, 0), 3.0);
  EXPECT_EQ(M(1, 1), 4.0);
}

TEST(BoglePerkins, ZeroRowFallsBackToSchubert) {
  Matrix M = Matrix::Zero(2, 2);
  bogle_perkins_update(M, SparsityPattern::dense(2), Vector{{1.0, 1.0}}, Vector{{2.0, 0.0}});
  EXPECT_DOUBLE_EQ(M(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(M(0, 1), 1.0);
  EXPECT_EQ(M.row(1).norm(), 0.0);
}

TEST(BoglePerkins, DenseSmoke) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 50; ++t) {
    Matrix M = random_matrix(rng, 3);
    const Matrix before = M;
    bogle_perkins_update(M, SparsityPattern::dense(3), test::uniform_vector(rng, 3, -1, 1),
                         test::uniform_vector(rng, 3, -1, 1));
    EXPECT_TRUE(std::isfinite((M - before).norm()));
    JacobianModel model(JacobianStrategy::BoglePerkins, SparsityPattern::dense(3));
    model.set_matrix(M);
    try {
      EXPECT_TRUE(model.solve_step(Vector::Ones(3), std::nullopt).s.allFinite());
    } catch (const SingularMatrixError&) {
    }
  }
}

TEST(Refresh, Schedule) {
  EXPECT_TRUE(should_refresh(0, 5));
  EXPECT_TRUE(should_refresh(1, 5));
  EXPECT_TRUE(should_refresh(6, 5));
  EXPECT_TRUE(should_refresh(11, 5));
  EXPECT_FALSE(should_refresh(3, 5));
  EXPECT_FALSE(should_refresh(5, 5));
  EXPECT_THROW(should_refresh(0, 0), ConfigError);
}

TEST(SolveStep, Identity) {
  JacobianModel model(JacobianStrategy::FiniteDifference, SparsityPattern::dense(2));
  model.set_matrix(Matrix::Identity(2, 2));
  const auto r = solve_step(model, Vector{{1.0, -2.0}}, std::nullopt);
  EXPECT_EQ(r.s, (Vector{{-1.0, 2.0}}));
  EXPECT_LE(r.r.norm(), 1e-14);
}

TEST(SolveStep, SingularMatrix) {
  JacobianModel model(JacobianStrategy::FiniteDifference, SparsityPattern::dense(2));
  model.set_matrix(Matrix{{1.0, 0.0}, {0.0, 0.0}});
  EXPECT_THROW(model.solve_step(Vector{{1.0, 1.0}}, std::nullopt), SingularMatrixError);
  model.set_matrix(Matrix{{1.0, 0.0}, {0.0, 1e-17}});
  EXPECT_THROW(model.solve_step(Vector{{1.0, 1.0}}, std::nullopt), SingularMatrixError);
}

TEST(SolveStep, ForcingTermBoundsTheResidual) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 20; ++t) {
    const Matrix M = random_matrix(rng, 10) + 10.0 * Matrix::Identity(10, 10);
    const Vector Fx = test::uniform_vector(rng, 10, -1.0, 1.0);
    JacobianModel model(JacobianStrategy::FiniteDifference, SparsityPattern::dense(10));
    model.set_matrix(M);
    const auto r = model.solve_step(Fx, 0.1);
    EXPECT_LE(r.r.norm(), 0.1 * Fx.norm());
    EXPECT_LE((M * r.s + Fx - r.r).norm(), 1e-12);
    EXPECT_NEAR(r.r_norm_ratio, r.r.norm() / Fx.norm(), 1e-15);
  }
}

TEST(JacobianModel, SecantPairIsFoldedInOnNonRefreshIterations) {
  const Problem p = make_problem("broyden_tridiagonal", 10);
  JacobianModel model(JacobianStrategy::BroydenSchubert, p.structure());
  std::int64_t evals = 0;
  const Vector x0 = starting_point(p, 1.0);
  EXPECT_TRUE(model.prepare(0, p, x0, p.evaluate(x0), 5, evals));
  EXPECT_EQ(evals, 10);

  const Vector x1 = x0 + Vector::Constant(10, 0.01);
  const Vector dF = p.evaluate(x1) - p.evaluate(x0);
  model.record_secant_pair(x1 - x0, dF);
  EXPECT_TRUE(model.prepare(1, p, x1, p.evaluate(x1), 5, evals));  // (1-1) mod 5 == 0

  const Vector x2 = x1 + Vector::Constant(10, 0.02);
  const Vector dF2 = p.evaluate(x2) - p.evaluate(x1);
  model.record_secant_pair(x2 - x1, dF2);
  EXPECT_FALSE(model.prepare(2, p, x2, p.evaluate(x2), 5, evals));
  EXPECT_EQ(evals, 20);
  EXPECT_LE((model.matrix() * (x2 - x1) - dF2).norm(), 1e-12 * (1.0 + dF2.norm()));
}

TEST(NormInfMatrix, MaxRowSum) {
  EXPECT_EQ(norm_inf(Matrix{{1.0, -2.0}, {0.5, 0.5}}), 3.0);
}
