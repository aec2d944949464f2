#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "giqn/problems.hpp"
#include "giqn/solver.hpp"
#include "support.hpp"

using namespace giqn;

namespace {

SolverConfig with_strategy(JacobianStrategy s) {
  SolverConfig cfg;
  cfg.jacobian_strategy = s;
  return cfg;
}

// F_i = x_i^2 - 0.01 on [0.05, 0.12]^2: from the lower corner the Newton
// step overshoots the upper bound, so the first iteration needs CondG.
Problem overshoot_problem() {
  Problem p;
  p.name = "overshoot";
  p.n = 2;
  p.F = [](const Vector& x) -> Vector { return x.cwiseProduct(x).array() - 0.01; };
  p.jac = [](const Vector& x) -> Matrix { return Matrix((2.0 * x).asDiagonal()); };
  p.set = std::make_shared<BoxSet>(BoxSet::uniform(2, 0.05, 0.12));
  return p;
}

}  // namespace

TEST(Solve, AffineMapConvergesInOneExactStep) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 20; ++t) {
    const Vector c = test::uniform_vector(rng, 6, -0.9, 0.9);
    const Problem p = test::affine_problem(c, -1.0, 1.0);
    const Vector x0 = test::uniform_in(rng, static_cast<const BoxSet&>(*p.set));
    const auto report = solve(p, x0, with_strategy(JacobianStrategy::Analytic));
    EXPECT_EQ(report.status, SolveStatus::Converged);
    ASSERT_EQ(report.iterations, 1);
    EXPECT_EQ(report.trace[0].lambda, 1.0);
    EXPECT_EQ(report.trace[0].branch, AcceptBranch::Desc1Plus);
    EXPECT_LE(report.final_norm_inf, 1e-12);
  }
}

TEST(IterateOnce, AffineStepLandsOnRoot) {
  const Vector c{{0.3, -0.2, 0.1}};
  const Problem p = test::affine_problem(c, -1.0, 1.0);
  IterateState state;
  state.set_point(Vector{{-1.0, 1.0, 0.0}}, p.evaluate(Vector{{-1.0, 1.0, 0.0}}));
  JacobianModel model(JacobianStrategy::Analytic, p.structure());
  const SolverConfig cfg = with_strategy(JacobianStrategy::Analytic);
  EtaSchedule schedule = cfg.eta_schedule;
  schedule.f0_sq = state.norm2 * state.norm2;
  const auto it = iterate_once(state, model, cfg, p, schedule);
  ASSERT_FALSE(it.failure);
  EXPECT_EQ(state.k, 1);
  EXPECT_EQ(it.record.lambda, 1.0);
  EXPECT_FALSE(it.record.used_condg);
  EXPECT_LE((state.x - c).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(state.fe_count, 1);
}

TEST(Solve, StartingAtARootStopsImmediately) {
  const Problem p = make_problem("brown_almost_linear", 5);
  const auto report = solve(p, Vector::Ones(5), SolverConfig{});
  EXPECT_EQ(report.status, SolveStatus::Converged);
  EXPECT_EQ(report.iterations, 0);
  EXPECT_EQ(report.fe_count, 1);
  EXPECT_EQ(report.jac_fe_count, 0);
  EXPECT_TRUE(report.trace.empty());
}

TEST(Solve, InfeasibleNewtonStepIsRestoredByCondG) {
  const Problem p = overshoot_problem();
  for (auto s : {JacobianStrategy::Analytic, JacobianStrategy::FiniteDifference}) {
    const auto report = solve(p, Vector::Constant(2, 0.05), with_strategy(s));
    EXPECT_EQ(report.status, SolveStatus::Converged);
    ASSERT_FALSE(report.trace.empty());
    EXPECT_TRUE(report.trace[0].used_condg);
    EXPECT_GT(report.trace[0].condg_iterations, 0);
    EXPECT_LT(report.trace[0].s_tilde_norm, report.trace[0].s_norm);
    EXPECT_GT(report.condg_iters_total, 0);
    EXPECT_LE((report.x - Vector::Constant(2, 0.1)).norm(), 1e-6);
    EXPECT_TRUE(all_ok(check_run_invariants(report, with_strategy(s))));
  }
}

TEST(Solve, FeasibilityHoldsAtEveryIterate) {
  const Problem p = make_problem("singular_broyden", 20);
  const auto cfg = with_strategy(JacobianStrategy::BroydenSchubert);
  int seen = 0;
  const auto report = solve(p, starting_point(p, 3.0), cfg, [&](const IterateState& s) {
    ++seen;
    ASSERT_TRUE(p.set->contains(s.x));
  });
  EXPECT_EQ(seen, report.iterations);
}

TEST(Solve, MaxIterations) {
  const Problem p = make_problem("broyden_tridiagonal", 50);
  SolverConfig cfg;
  cfg.max_iter = 1;
  const auto report = solve(p, starting_point(p, 1.0), cfg);
  EXPECT_EQ(report.status, SolveStatus::MaxIterations);
  EXPECT_EQ(report.iterations, 1);
}

TEST(Solve, SingularModelUsesDiagonalShift) {
  // dF_0/dx_0 = 3 x_0^2 vanishes at the start point; a fresh FD matrix is
  // already current, so the fallback goes straight to the shift.
  Problem p;
  p.name = "cubic";
  p.n = 2;
  p.F = [](const Vector& x) -> Vector { return Vector{{x[0] * x[0] * x[0] - 0.001, x[1] - 0.3}}; };
  p.set = std::make_shared<BoxSet>(BoxSet::uniform(2, -1.0, 1.0));
  const auto report = solve(p, Vector::Zero(2), SolverConfig{});
  ASSERT_FALSE(report.trace.empty());
  EXPECT_EQ(report.trace[0].fallback, SingularFallback::DiagonalShift);
  EXPECT_TRUE(all_ok(check_run_invariants(report, SolverConfig{})));
}

TEST(Solve, ConstantResidualIsALinearSolveFailure) {
  Problem p;
  p.name = "constant";
  p.n = 2;
  p.F = [](const Vector&) -> Vector { return Vector::Ones(2); };
  p.jac = [](const Vector&) -> Matrix { return Matrix::Zero(2, 2); };
  p.set = std::make_shared<BoxSet>(BoxSet::uniform(2, -1.0, 1.0));
  for (auto s : {JacobianStrategy::FiniteDifference, JacobianStrategy::Analytic}) {
    const auto report = solve(p, Vector::Zero(2), with_strategy(s));
    EXPECT_EQ(report.status, SolveStatus::LinearSolveFailure);
    EXPECT_EQ(report.iterations, 0);
  }
}

TEST(Solve, InputErrors) {
  const Problem p = test::affine_problem(Vector::Zero(2), -1.0, 1.0);
  EXPECT_THROW(solve(p, Vector{{2.0, 0.0}}, SolverConfig{}), InfeasibleStart);
  EXPECT_THROW(solve(p, Vector::Zero(3), SolverConfig{}), DimensionMismatch);
  SolverConfig bad;
  bad.sigma = 1.5;
  EXPECT_THROW(solve(p, Vector::Zero(2), bad), ConfigError);
  Problem no_jac = p;
  no_jac.jac = nullptr;
  EXPECT_THROW(solve(no_jac, Vector::Zero(2), with_strategy(JacobianStrategy::Analytic)),
               ConfigError);
}

TEST(Solve, RunsAreBitIdentical) {
  const Problem p = make_problem("broyden_tridiagonal", 60);
  for (auto s : {JacobianStrategy::FiniteDifference, JacobianStrategy::BroydenSchubert,
                 JacobianStrategy::BoglePerkins}) {
    const auto a = solve(p, starting_point(p, 2.0), with_strategy(s));
    const auto b = solve(p, starting_point(p, 2.0), with_strategy(s));
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      EXPECT_EQ(a.trace[i].norm_next, b.trace[i].norm_next);
      EXPECT_EQ(a.trace[i].lambda, b.trace[i].lambda);
      EXPECT_EQ(a.trace[i].branch, b.trace[i].branch);
    }
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.fe_count, b.fe_count);
  }
}

TEST(Solve, InexactSolvesRespectTheForcingTerm) {
  const Problem p = make_problem("broyden_tridiagonal", 100);
  SolverConfig cfg;
  cfg.forcing = 0.1;
  const auto report = solve(p, starting_point(p, 1.0), cfg);
  EXPECT_EQ(report.status, SolveStatus::Converged);
  for (const auto& r : report.trace) EXPECT_LE(r.linear_residual_ratio, 0.1);
}

TEST(LinearizedResidual, Examples) {
  const Problem p = make_problem("broyden_tridiagonal", 30);
  const Vector x = starting_point(p, 1.0);
  const Vector Fx = p.evaluate(x);
  const Vector newton = p.jacobian(x).partialPivLu().solve(-Fx);
  EXPECT_LE(linearized_residual_ratio(p, x, Fx, newton), 1e-10);
  EXPECT_EQ(linearized_residual_ratio(p, x, Fx, Vector::Zero(30)), 1.0);

  Problem no_jac = p;
  no_jac.jac = nullptr;
  EXPECT_THROW(linearized_residual_ratio(no_jac, x, Fx, newton), UnsupportedOperation);
}

TEST(LinearizedResidual, FiniteDifferenceFirstIteration) {
  const Problem p = make_problem("broyden_tridiagonal", 500);
  SolverConfig cfg;
  cfg.record_linearized_residual = true;
  cfg.max_iter = 1;
  const auto report = solve(p, starting_point(p, 1.0), cfg);
  ASSERT_EQ(report.trace.size(), 1u);
  ASSERT_TRUE(report.trace[0].linearized_residual);
  EXPECT_FALSE(report.trace[0].used_condg);
  EXPECT_LE(*report.trace[0].linearized_residual, 1e-4);
}

TEST(Invariants, HoldOnShippedRuns) {
  for (const char* name : {"broyden_tridiagonal", "powell_singular_ext", "extended_wood"}) {
    const Problem p = make_problem(name, 40);
    for (auto s : {JacobianStrategy::FiniteDifference, JacobianStrategy::BroydenSchubert,
                   JacobianStrategy::BoglePerkins}) {
      const auto cfg = with_strategy(s);
      const auto checks = check_run_invariants(solve(p, starting_point(p, 2.0), cfg), cfg);
      for (const auto& c : checks) {
        if (!c.advisory) {
          EXPECT_TRUE(c.ok) << name << ' ' << to_string(s) << ": " << c.name;
        }
      }
    }
  }
}

TEST(Invariants, DetectTamperedReports) {
  const Problem p = make_problem("broyden_tridiagonal", 40);
  const SolverConfig cfg;
  const auto report = solve(p, starting_point(p, 1.0), cfg);
  ASSERT_TRUE(all_ok(check_run_invariants(report, cfg)));

  auto broken = report;
  broken.trace[1].feasible = false;
  EXPECT_FALSE(all_ok(check_run_invariants(broken, cfg)));

  broken = report;
  broken.trace[0].norm_next = (2.0 + broken.trace[0].eta_k) * broken.trace[0].norm;
  EXPECT_FALSE(all_ok(check_run_invariants(broken, cfg)));

  broken = report;
  broken.trace[0].lambda = 0.3;
  EXPECT_FALSE(all_ok(check_run_invariants(broken, cfg)));

  broken = report;
  broken.iterations += 1;
  EXPECT_FALSE(all_ok(check_run_invariants(broken, cfg)));
}

TEST(Invariants, TailHeuristicIsAdvisory) {
  SolveReport r;
  r.status = SolveStatus::Converged;
  r.initial_norm = 1.0;
  r.eta_schedule = EtaSchedule{0.99, 100.0, 1.0};
  r.iterations = 2;
  IterationRecord a;
  a.k = 0;
  a.norm = 1.0;
  a.norm_next = 1.5;
  a.eta_k = 101.0;
  a.lambda = 0.25;
  a.backtracks = 2;
  a.branch = AcceptBranch::Desc2Plus;
  a.s_tilde_norm = 1.0;
  a.step_norm = 0.25;
  IterationRecord b = a;
  b.k = 1;
  b.norm = 1.5;
  b.norm_next = 1e-7;
  b.eta_k = 99.99;
  b.lambda = 1.0;
  b.backtracks = 0;
  b.branch = AcceptBranch::Desc1Plus;
  b.step_norm = 1.0;
  r.trace = {a, b};
  r.final_norm_inf = 1e-7;
  const auto checks = check_run_invariants(r, SolverConfig{});
  bool tail_failed = false;
  for (const auto& c : checks) tail_failed |= c.advisory && !c.ok;
  EXPECT_TRUE(tail_failed);
  EXPECT_TRUE(all_ok(checks));
}
