#pragma once

#include "giqn/core.hpp"
#include "giqn/feasible_set.hpp"

namespace giqn {

enum class CondGStatus { GapSatisfied, IterationCapped };

std::string_view to_string(CondGStatus status);

struct CondGResult {
  Vector z;
  /// Gap evaluations performed (t at exit).
  int iterations = 0;
  CondGStatus status = CondGStatus::IterationCapped;
  /// Last g*_t computed.
  double final_gap = 0.0;
};

/// Called with every z_t, including z_1 = x and the returned point.
using CondGObserver = std::function<void(const Vector&)>;

/// Approximate Euclidean projection of `y` onto `set` by conditional
/// gradient started at `x`, stopping once the gap g*_t >= -eps.
///
/// Each step takes alpha_t = min(1, -g*_t / ||u_t - z_t||^2), the exact
/// minimizer of ||z - y||^2 along the segment [z_t, u_t]. Every z_t is a
/// convex combination of members of C. With the gap certificate,
/// ||z - P_C(y)|| <= sqrt(2 eps).
///
/// When max_iter gaps have been evaluated without success the last iterate is
/// returned with IterationCapped. Throws InfeasibleStart if x is not in C.
CondGResult condg(const FeasibleSet& set, const Vector& y, const Vector& x, double eps,
                  int max_iter, const CondGObserver& observer = {});

}  // namespace giqn
