#pragma once

#include "giqn/core.hpp"

namespace giqn {

/// Vertex returned by the linear oracle together with the Frank-Wolfe gap
/// g* = <z - y, u - z>.
struct GapVertex {
  Vector u;
  double g_star = 0.0;
};

/// Nonempty convex compact set, accessed only through membership and a
/// linear-optimization oracle. Immutable once built.
class FeasibleSet {
 public:
  virtual ~FeasibleSet() = default;

  virtual int dimension() const = 0;

  /// Exact membership test, no tolerance.
  virtual bool contains(const Vector& x) const = 0;

  /// argmin over u in C of <c, u>.
  virtual Vector lo_argmin(const Vector& c) const = 0;

  virtual bool has_exact_projection() const { return false; }

  /// Euclidean projection. Throws UnsupportedOperation when not available.
  virtual Vector project_exact(const Vector& y) const;

  /// Removes roundoff drift from a point that is mathematically in C (a
  /// convex combination of members). No-op unless the set knows better.
  virtual void snap(Vector& /*x*/) const {}

  /// u = lo_argmin(z - y), g* = <z - y, u - z>. Requires z in C, which makes
  /// g* <= 0.
  GapVertex gap_and_vertex(const Vector& z, const Vector& y) const;
};

/// C = { x : l <= x <= u } with finite bounds.
class BoxSet final : public FeasibleSet {
 public:
  BoxSet(Vector lower, Vector upper);

  /// [lo, hi]^n.
  static BoxSet uniform(int n, double lo, double hi);

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  int dimension() const override { return static_cast<int>(lower_.size()); }
  bool contains(const Vector& x) const override;

  /// u_i = l_i when c_i >= 0, else u_i. Ties go to the lower bound.
  Vector lo_argmin(const Vector& c) const override;

  bool has_exact_projection() const override { return true; }
  Vector project_exact(const Vector& y) const override;
  void snap(Vector& x) const override;

 private:
  void check_dim(const Vector& v, const char* what) const;

  Vector lower_;
  Vector upper_;
};

}  // namespace giqn
