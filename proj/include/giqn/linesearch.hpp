#pragma once

#include <optional>

#include "giqn/core.hpp"
#include "giqn/feasible_set.hpp"

namespace giqn {

/// ||F(trial)|| <= (1 - alpha (1 + lambda)) ||F(x_k)||.
bool check_desc1(double norm_trial, double norm_k, double alpha, double lambda);

/// ||F(trial)|| <= (1 + eta_k - alpha lambda) ||F(x_k)||.
bool check_desc2(double norm_trial, double norm_k, double alpha, double lambda, double eta_k);

struct BacktrackOutcome {
  double lambda = 1.0;
  /// lambda == sigma^backtracks.
  int backtracks = 0;
  AcceptBranch branch = AcceptBranch::Desc1Plus;
  Vector p;
  Vector x_new;
  Vector Fx_new;
  double norm_new = 0.0;
};

struct BacktrackResult {
  /// Empty when lambda fell below lambda_min with no branch accepted.
  std::optional<BacktrackOutcome> outcome;
  int trial_evals = 0;
};

/// Derivative-free nonmonotone backtracking over s+ = s~ and
/// s- = -s~ (or -s when s~ = 0).
///
/// For lambda = 1, sigma, sigma^2, ... the tests run in this order:
///   x + lambda s+ against desc1,
///   x + lambda s- against membership and desc1,
///   x + lambda s+ against desc2 (only if s+ != 0),
///   x + lambda s- against membership and desc2.
/// Each trial point is evaluated at most once per lambda. The plus trial
/// lies on the segment [x, x + s~] and is snapped onto C; the minus trial is
/// only evaluated after an exact membership test.
BacktrackResult backtrack(const Vector& x, const Vector& s, const Vector& s_tilde,
                          double Fx_norm, double eta_k, const SolverConfig& cfg,
                          const FeasibleSet& set, const ResidualFn& F);

}  // namespace giqn
