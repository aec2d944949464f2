#include "giqn/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>

#include "giqn/condg.hpp"
#include "giqn/feasible_set.hpp"
#include "giqn/linesearch.hpp"

namespace giqn {

namespace {

constexpr double kDiagonalShiftFactor = 1e-8;

std::optional<StepResult> try_solve(JacobianModel& model, const Vector& Fx,
                                    std::optional<double> forcing) {
  try {
    return model.solve_step(Fx, forcing);
  } catch (const SingularMatrixError&) {
    return std::nullopt;
  }
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

double log_add_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log of the right-hand side only; `lhs` is compared through its log too.
bool log_le(double lhs, double log_rhs) {
  if (lhs <= 0.0) return true;
  return std::log(lhs) <= log_rhs + 1e-12 * std::max(1.0, std::abs(log_rhs));
}

}  // namespace

double linearized_residual_ratio(const Problem& problem, const Vector& x, const Vector& Fx,
                                 const Vector& s_tilde) {
  if (!problem.has_jacobian()) {
    throw UnsupportedOperation("linearized residual needs an analytic Jacobian");
  }
  const Matrix J = problem.jacobian(x);
  return (J * s_tilde + Fx).norm() / Fx.norm();
}

IterationResult iterate_once(IterateState& state, JacobianModel& model, const SolverConfig& cfg,
                             const Problem& problem, const EtaSchedule& schedule) {
  const FeasibleSet& set = *problem.set;
  IterationResult result;
  IterationRecord& rec = result.record;
  rec.k = state.k;
  rec.norm = state.norm2;
  rec.norm_inf = state.norm_inf;
  rec.eta_k = eta(schedule, state.k);

  // Quasi-Newton step.
  rec.refreshed =
      model.prepare(state.k, problem, state.x, state.Fx, cfg.refresh_period, state.jac_fe_count);
  std::optional<StepResult> step = try_solve(model, state.Fx, cfg.forcing);
  if (!step) {
    rec.fallback = SingularFallback::FiniteDifference;
    // A finite-difference matrix just built at x_k would be rebuilt identically.
    const bool fd_is_current =
        rec.refreshed && model.strategy() != JacobianStrategy::Analytic;
    if (!fd_is_current) {
      model.refresh_fd(problem, state.x, state.Fx, state.jac_fe_count, state.k);
      step = try_solve(model, state.Fx, cfg.forcing);
    }
    if (!step) {
      rec.fallback = SingularFallback::DiagonalShift;
      model.shift_diagonal(kDiagonalShiftFactor * norm_inf(model.matrix()));
      step = try_solve(model, state.Fx, cfg.forcing);
    }
    if (!step) {
      result.failure = SolveStatus::LinearSolveFailure;
      return result;
    }
  }
  rec.linear_residual_ratio = step->r_norm_ratio;
  const Vector& s = step->s;
  rec.s_norm = s.norm();

  // Feasibility restoration.
  const Vector y = state.x + s;
  Vector s_tilde;
  if (set.contains(y)) {
    s_tilde = s;
  } else {
    const double eps = cfg.theta_at(state.k) * s.squaredNorm();
    CondGResult cg = condg(set, y, state.x, eps, cfg.condg_max_iter);
    rec.used_condg = true;
    rec.condg_iterations = cg.iterations;
    rec.condg_capped = cg.status == CondGStatus::IterationCapped;
    state.condg_iters_total += cg.iterations;
    s_tilde = cg.z - state.x;
  }
  rec.s_tilde_norm = s_tilde.norm();

  // Nonmonotone backtracking.
  BacktrackResult bt =
      backtrack(state.x, s, s_tilde, state.norm2, rec.eta_k, cfg, set, problem.F);
  state.fe_count += bt.trial_evals;
  rec.trial_evals = bt.trial_evals;
  if (!bt.outcome) {
    result.failure = SolveStatus::NoProgress;
    return result;
  }
  BacktrackOutcome& acc = *bt.outcome;
  rec.lambda = acc.lambda;
  rec.backtracks = acc.backtracks;
  rec.branch = acc.branch;
  rec.step_norm = acc.p.norm();
  rec.norm_next = acc.norm_new;

  if (cfg.record_linearized_residual && problem.has_jacobian()) {
    rec.linearized_residual = linearized_residual_ratio(problem, state.x, state.Fx, s_tilde);
  }

  if (model.strategy() == JacobianStrategy::BroydenSchubert ||
      model.strategy() == JacobianStrategy::BoglePerkins) {
    model.record_secant_pair(acc.p, acc.Fx_new - state.Fx);
  }

  state.set_point(std::move(acc.x_new), std::move(acc.Fx_new));
  state.lambda_last = acc.lambda;
  state.branch_last = acc.branch;
  state.k += 1;
  rec.feasible = set.contains(state.x);
  return result;
}

SolveReport solve(const Problem& problem, const Vector& x0, const SolverConfig& cfg,
                  const IterateObserver& observer) {
  cfg.validate();
  if (!problem.set) throw ConfigError("problem has no feasible set");
  if (problem.n <= 0 || problem.set->dimension() != problem.n) {
    throw DimensionMismatch("problem dimension does not match its feasible set");
  }
  if (x0.size() != problem.n) throw DimensionMismatch("x0 has wrong dimension");
  if (!problem.set->contains(x0)) throw InfeasibleStart("x0 is not in the feasible set");
  if (cfg.jacobian_strategy == JacobianStrategy::Analytic && !problem.has_jacobian()) {
    throw ConfigError("analytic Jacobian strategy requested for a problem without one");
  }

  const auto start = std::chrono::steady_clock::now();

  IterateState state;
  state.set_point(x0, problem.evaluate(x0));
  state.fe_count = 1;

  EtaSchedule schedule = cfg.eta_schedule;
  schedule.f0_sq = state.norm2 * state.norm2;

  SolveReport report;
  report.initial_norm = state.norm2;
  report.eta_schedule = schedule;

  JacobianModel model(cfg.jacobian_strategy, problem.structure());

  int unchanged = 0;
  for (;;) {
    if (state.norm_inf <= cfg.tol_inf) {
      report.status = SolveStatus::Converged;
      break;
    }
    if (state.k >= cfg.max_iter) {
      report.status = SolveStatus::MaxIterations;
      break;
    }
    const double previous_inf = state.norm_inf;
    IterationResult it = iterate_once(state, model, cfg, problem, schedule);
    if (it.failure) {
      report.status = *it.failure;
      break;
    }
    report.trace.push_back(std::move(it.record));
    if (observer) observer(state);

    unchanged = same_bits(previous_inf, state.norm_inf) ? unchanged + 1 : 0;
    if (unchanged >= cfg.stagnation_window && state.norm_inf > cfg.tol_inf) {
      report.status = SolveStatus::NoProgress;
      break;
    }
  }

  report.time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.iterations = state.k;
  report.fe_count = state.fe_count;
  report.jac_fe_count = state.jac_fe_count;
  report.condg_iters_total = state.condg_iters_total;
  report.final_norm = state.norm2;
  report.final_norm_inf = state.norm_inf;
  report.x = std::move(state.x);
  return report;
}

std::vector<InvariantCheck> check_run_invariants(const SolveReport& report,
                                                 const SolverConfig& cfg) {
  std::vector<InvariantCheck> checks;
  auto add = [&](std::string name, bool ok, std::string detail = {}, bool advisory = false) {
    checks.push_back({std::move(name), ok, std::move(detail), advisory});
  };
  auto at = [](const IterationRecord& r) { return "k=" + std::to_string(r.k); };

  const double f0 = report.initial_norm;
  const double eta_total = report.eta_schedule.total();
  const double alpha = cfg.alpha;
  const auto& trace = report.trace;

  add("trace length equals iterations",
      trace.size() == static_cast<std::size_t>(report.iterations));
  add("converged iff final ||F||_inf <= tol",
      (report.status == SolveStatus::Converged) == (report.final_norm_inf <= cfg.tol_inf));

  {
    std::string bad;
    for (const auto& r : trace)
      if (!r.feasible) bad = at(r);
    add("iterates stay in C", bad.empty(), bad);
  }
  {
    std::string bad;
    for (const auto& r : trace)
      if (!(r.norm_next <= (1.0 + r.eta_k) * r.norm)) bad = at(r);
    add("||F(x_{k+1})|| <= (1 + eta_k) ||F(x_k)||", bad.empty(), bad);
  }
  {
    // max_k ||F(x_k)|| <= e^eta ||F(x_0)||
    const double log_bound = eta_total + std::log(f0);
    std::string bad;
    for (const auto& r : trace)
      if (!log_le(r.norm_next, log_bound)) bad = at(r);
    add("||F(x_k)|| <= e^eta ||F(x_0)||", f0 == 0.0 || bad.empty(), bad);
  }
  {
    // sum lambda_k ||F(x_k)|| <= (1/alpha + eta e^eta / alpha) ||F(x_0)||
    const double log_bound =
        std::log(f0) +
        log_add_exp(-std::log(alpha), std::log(eta_total) + eta_total - std::log(alpha));
    double running = 0.0;
    std::string bad;
    for (const auto& r : trace) {
      running += r.lambda * r.norm;
      if (!log_le(running, log_bound)) bad = at(r);
    }
    add("sum lambda_k ||F(x_k)|| within summability bound", f0 == 0.0 || bad.empty(), bad);
  }
  {
    // ||F(x_k)|| <= (1 - alpha)^{m(k)} e^eta ||F(x_0)||, m(k) = desc1 acceptances before k
    int m = 0;
    std::string bad;
    for (const auto& r : trace) {
      if (is_desc1(r.branch)) ++m;
      const double log_bound = m * std::log1p(-alpha) + eta_total + std::log(f0);
      if (!log_le(r.norm_next, log_bound)) bad = at(r);
    }
    add("desc1 geometric decay bound", f0 == 0.0 || bad.empty(), bad);
  }
  {
    std::string bad;
    for (const auto& r : trace) {
      // s- = -s_k when s~_k = 0, so the direction length falls back to ||s_k||.
      const double dir = r.s_tilde_norm != 0.0 ? r.s_tilde_norm : r.s_norm;
      const double expected = r.lambda * dir;
      if (std::abs(r.step_norm - expected) > 1e-12 * std::max(1.0, expected) + 1e-15) bad = at(r);
    }
    add("||p_k|| = lambda_k ||s~_k||", bad.empty(), bad);
  }
  {
    std::string bad;
    for (const auto& r : trace) {
      const double expected = r.backtracks == 0 ? 1.0 : std::pow(cfg.sigma, r.backtracks);
      if (r.lambda != expected) bad = at(r);
    }
    add("lambda_k is an exact power of sigma", bad.empty(), bad);
  }
  {
    std::string bad;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i)
      if (trace[i].norm_next != trace[i + 1].norm) bad = at(trace[i]);
    add("trace norms chain", bad.empty(), bad);
  }
  {
    std::string bad;
    for (const auto& r : trace) {
      const bool holds = is_desc1(r.branch)
                             ? check_desc1(r.norm_next, r.norm, alpha, r.lambda)
                             : check_desc2(r.norm_next, r.norm, alpha, r.lambda, r.eta_k);
      if (!holds) bad = at(r);
    }
    add("accepted branch inequality holds", bad.empty(), bad);
  }
  if (report.status == SolveStatus::Converged && !trace.empty()) {
    const double first = trace.front().lambda * trace.front().norm;
    const double last = trace.back().lambda * trace.back().norm;
    std::ostringstream os;
    os << "first=" << first << " last=" << last;
    add("lambda_k ||F(x_k)|| tail below its first value", last <= first, os.str(), true);
  }
  return checks;
}

bool all_ok(const std::vector<InvariantCheck>& checks) {
  for (const auto& c : checks)
    if (!c.ok && !c.advisory) return false;
  return true;
}

}  // namespace giqn
