#include "giqn/condg.hpp"

#include <algorithm>

namespace giqn {

std::string_view to_string(CondGStatus status) {
  return status == CondGStatus::GapSatisfied ? "GapSatisfied" : "IterationCapped";
}

CondGResult condg(const FeasibleSet& set, const Vector& y, const Vector& x, double eps,
                  int max_iter, const CondGObserver& observer) {
  if (y.size() != set.dimension() || x.size() != set.dimension()) {
    throw DimensionMismatch("condg: dimension mismatch");
  }
  if (!(eps >= 0.0)) throw ConfigError("condg: eps must be >= 0");
  if (max_iter < 1) throw ConfigError("condg: max_iter must be >= 1");
  if (!set.contains(x)) throw InfeasibleStart("condg: start point is not in the feasible set");

  CondGResult result;
  Vector z = x;
  if (observer) observer(z);
  for (int t = 1; t <= max_iter; ++t) {
    GapVertex gv = set.gap_and_vertex(z, y);
    result.iterations = t;
    result.final_gap = gv.g_star;
    if (gv.g_star >= -eps) {
      result.status = CondGStatus::GapSatisfied;
      result.z = std::move(z);
      return result;
    }
    // g* < -eps <= 0 forces u_t != z_t, so the denominator is positive.
    const Vector d = gv.u - z;
    const double step = std::min(1.0, -gv.g_star / d.squaredNorm());
    if (step == 1.0) {
      z = std::move(gv.u);
    } else {
      z += step * d;
      set.snap(z);
    }
    if (observer) observer(z);
  }
  result.status = CondGStatus::IterationCapped;
  result.z = std::move(z);
  return result;
}

}  // namespace giqn
