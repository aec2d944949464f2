#pragma once

#include <memory>
#include <random>

#include "giqn/core.hpp"
#include "giqn/feasible_set.hpp"

namespace giqn::test {

/// F(x) = x - c on a box, with its exact Jacobian.
inline Problem affine_problem(const Vector& c, double lo, double hi) {
  const int n = static_cast<int>(c.size());
  Problem p;
  p.name = "affine";
  p.n = n;
  p.F = [c](const Vector& x) -> Vector { return x - c; };
  p.jac = [n](const Vector&) -> Matrix { return Matrix::Identity(n, n); };
  p.pattern = SparsityPattern::from_entries(n, [n] {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) e.emplace_back(i, i);
    return e;
  }());
  p.set = std::make_shared<BoxSet>(BoxSet::uniform(n, lo, hi));
  return p;
}

inline Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline Vector uniform_in(std::mt19937_64& rng, const BoxSet& box) {
  Vector v(box.dimension());
  for (int i = 0; i < v.size(); ++i) {
    v[i] = std::uniform_real_distribution<double>(box.lower()[i], box.upper()[i])(rng);
  }
  return v;
}

}  // namespace giqn::test
