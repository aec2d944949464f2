#include "giqn/feasible_set.hpp"

#include <cmath>
#include <string>

namespace giqn {

Vector FeasibleSet::project_exact(const Vector& /*y*/) const {
  throw UnsupportedOperation("feasible set has no exact projection");
}

GapVertex FeasibleSet::gap_and_vertex(const Vector& z, const Vector& y) const {
  if (z.size() != dimension() || y.size() != dimension()) {
    throw DimensionMismatch("gap_and_vertex: dimension mismatch");
  }
  const Vector c = z - y;
  GapVertex out;
  out.u = lo_argmin(c);
  out.g_star = c.dot(out.u - z);
  return out;
}

BoxSet::BoxSet(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) throw DimensionMismatch("box bounds differ in size");
  if (lower_.size() == 0) throw ConfigError("box must have positive dimension");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
      throw ConfigError("box bounds must be finite");
    }
    if (lower_[i] > upper_[i]) {
      throw ConfigError("empty box: l_" + std::to_string(i) + " > u_" + std::to_string(i));
    }
  }
}

BoxSet BoxSet::uniform(int n, double lo, double hi) {
  return BoxSet(Vector::Constant(n, lo), Vector::Constant(n, hi));
}

void BoxSet::check_dim(const Vector& v, const char* what) const {
  if (v.size() != lower_.size()) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(lower_.size()) + ", got " + std::to_string(v.size()));
  }
}

bool BoxSet::contains(const Vector& x) const {
  check_dim(x, "contains");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(lower_[i] <= x[i] && x[i] <= upper_[i])) return false;
  }
  return true;
}

Vector BoxSet::lo_argmin(const Vector& c) const {
  check_dim(c, "lo_argmin");
  Vector u(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) u[i] = c[i] >= 0.0 ? lower_[i] : upper_[i];
  return u;
}

Vector BoxSet::project_exact(const Vector& y) const {
  check_dim(y, "project_exact");
  return y.cwiseMax(lower_).cwiseMin(upper_);
}

void BoxSet::snap(Vector& x) const {
  check_dim(x, "snap");
  x = x.cwiseMax(lower_).cwiseMin(upper_);
}

}  // namespace giqn
