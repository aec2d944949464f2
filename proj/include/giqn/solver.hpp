#pragma once

#include <optional>
#include <string>
#include <vector>

#include "giqn/core.hpp"
#include "giqn/jacobian_model.hpp"

namespace giqn {

/// Called after every accepted iteration with the new state.
using IterateObserver = std::function<void(const IterateState&)>;

struct IterationResult {
  /// Set when the iteration could not produce a new iterate.
  std::optional<SolveStatus> failure;
  IterationRecord record;
};

/// One outer iteration: build M_k, solve for s_k, restore feasibility with
/// CondG when y_k leaves C, backtrack, and advance `state`. On failure the
/// state is left at x_k (evaluation counters still advance).
IterationResult iterate_once(IterateState& state, JacobianModel& model, const SolverConfig& cfg,
                             const Problem& problem, const EtaSchedule& schedule);

/// Runs the globalized inexact quasi-Newton conditional gradient method
/// from x0 until ||F(x_k)||_inf <= cfg.tol_inf or a failure is detected.
/// Throws InfeasibleStart if x0 is not in C and ConfigError on bad settings.
SolveReport solve(const Problem& problem, const Vector& x0, const SolverConfig& cfg,
                  const IterateObserver& observer = {});

/// ||F'(x) s~ + F(x)|| / ||F(x)|| using the analytic Jacobian. Diagnostic
/// only. Throws UnsupportedOperation without an analytic Jacobian.
double linearized_residual_ratio(const Problem& problem, const Vector& x, const Vector& Fx,
                                 const Vector& s_tilde);

struct InvariantCheck {
  std::string name;
  bool ok = true;
  std::string detail;
  /// Heuristic rather than a bound implied by the convergence theory;
  /// reported but ignored by all_ok.
  bool advisory = false;
};

/// Checks a finished run against the per-step and global bounds of the
/// method: feasibility, the nonmonotone envelope, summability of
/// lambda_k ||F(x_k)||, desc1 geometric decay and the step-length identity.
/// Bounds with e^eta are compared in log space.
std::vector<InvariantCheck> check_run_invariants(const SolveReport& report,
                                                 const SolverConfig& cfg);

bool all_ok(const std::vector<InvariantCheck>& checks);

}  // namespace giqn
