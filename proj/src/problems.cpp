#include "giqn/problems.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "giqn/feasible_set.hpp"

namespace giqn {

namespace {

using Entries = std::vector<std::pair<int, int>>;

Entries banded(int n, int below, int above) {
  Entries e;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - below); j <= std::min(n - 1, i + above); ++j) e.emplace_back(i, j);
  return e;
}

// ---------------------------------------------------------------------------
// Brown's almost linear system.
//   F_i = x_i + sum_j x_j - (n + 1),  i < n
//   F_n = prod_j x_j - 1

Vector brown_F(const Vector& x) {
  const auto n = x.size();
  Vector f(n);
  const double sum = x.sum();
  for (Eigen::Index i = 0; i + 1 < n; ++i) f[i] = x[i] + sum - static_cast<double>(n + 1);
  f[n - 1] = x.prod() - 1.0;
  return f;
}

Matrix brown_J(const Vector& x) {
  const auto n = x.size();
  Matrix J = Matrix::Ones(n, n);
  J.diagonal().array() += 1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double p = 1.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != j) p *= x[k];
    J(n - 1, j) = p;
  }
  return J;
}

// ---------------------------------------------------------------------------
// Extended Freudenstein-Roth, pairs (x_{2j-1}, x_{2j}).
//   F_{2j-1} = x_{2j-1} + ((5 - x_{2j}) x_{2j} - 2) x_{2j} - 13
//   F_{2j}   = x_{2j-1} + ((x_{2j} + 1) x_{2j} - 14) x_{2j} - 29

Vector freudenstein_roth_F(const Vector& x) {
  Vector f(x.size());
  for (Eigen::Index i = 0; i < x.size(); i += 2) {
    const double a = x[i], b = x[i + 1];
    f[i] = a + ((5.0 - b) * b - 2.0) * b - 13.0;
    f[i + 1] = a + ((b + 1.0) * b - 14.0) * b - 29.0;
  }
  return f;
}

Matrix freudenstein_roth_J(const Vector& x) {
  Matrix J = Matrix::Zero(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); i += 2) {
    const double b = x[i + 1];
    J(i, i) = 1.0;
    J(i, i + 1) = 10.0 * b - 3.0 * b * b - 2.0;
    J(i + 1, i) = 1.0;
    J(i + 1, i + 1) = 3.0 * b * b + 2.0 * b - 14.0;
  }
  return J;
}

Entries pairwise_blocks(int n) {
  Entries e;
  for (int i = 0; i < n; i += 2)
    for (int r = i; r < i + 2; ++r)
      for (int c = i; c < i + 2; ++c) e.emplace_back(r, c);
  return e;
}

// ---------------------------------------------------------------------------
// Tridiagonal system.
//   F_1 = 4 (x_1 - x_2^2)
//   F_i = 8 x_i (x_i^2 - x_{i-1}) - 2 (1 - x_i) + 4 (x_i - x_{i+1}^2)
//   F_n = 8 x_n (x_n^2 - x_{n-1}) - 2 (1 - x_n)

Vector tridiagonal_system_F(const Vector& x) {
  const auto n = x.size();
  Vector f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = 0.0;
    if (i > 0) v += 8.0 * x[i] * (x[i] * x[i] - x[i - 1]) - 2.0 * (1.0 - x[i]);
    if (i + 1 < n) v += 4.0 * (x[i] - x[i + 1] * x[i + 1]);
    f[i] = v;
  }
  return f;
}

Matrix tridiagonal_system_J(const Vector& x) {
  const auto n = x.size();
  Matrix J = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) {
      J(i, i - 1) = -8.0 * x[i];
      J(i, i) += 24.0 * x[i] * x[i] - 8.0 * x[i - 1] + 2.0;
    }
    if (i + 1 < n) {
      J(i, i) += 4.0;
      J(i, i + 1) = -8.0 * x[i + 1];
    }
  }
  return J;
}

// ---------------------------------------------------------------------------
// Extended Wood, blocks of four (1-based i mod 4 = 1, 2, 3, 0).
//   F_1 = -200 x_1 (x_2 - x_1^2) - (1 - x_1)
//   F_2 = 200 (x_2 - x_1^2) + 20.2 (x_2 - 1) + 19.8 (x_4 - 1)
//   F_3 = -180 x_3 (x_4 - x_3^2) - (1 - x_3)
//   F_4 = 180 (x_4 - x_3^2) + 20.2 (x_4 - 1) + 19.8 (x_2 - 1)

Vector wood_F(const Vector& x) {
  Vector f(x.size());
  for (Eigen::Index i = 0; i < x.size(); i += 4) {
    const double a = x[i], b = x[i + 1], c = x[i + 2], d = x[i + 3];
    f[i] = -200.0 * a * (b - a * a) - (1.0 - a);
    f[i + 1] = 200.0 * (b - a * a) + 20.2 * (b - 1.0) + 19.8 * (d - 1.0);
    f[i + 2] = -180.0 * c * (d - c * c) - (1.0 - c);
    f[i + 3] = 180.0 * (d - c * c) + 20.2 * (d - 1.0) + 19.8 * (b - 1.0);
  }
  return f;
}

Matrix wood_J(const Vector& x) {
  Matrix J = Matrix::Zero(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); i += 4) {
    const double a = x[i], b = x[i + 1], c = x[i + 2], d = x[i + 3];
    J(i, i) = -200.0 * b + 600.0 * a * a + 1.0;
    J(i, i + 1) = -200.0 * a;
    J(i + 1, i) = -400.0 * a;
    J(i + 1, i + 1) = 220.2;
    J(i + 1, i + 3) = 19.8;
    J(i + 2, i + 2) = -180.0 * d + 540.0 * c * c + 1.0;
    J(i + 2, i + 3) = -180.0 * c;
    J(i + 3, i + 2) = -360.0 * c;
    J(i + 3, i + 3) = 200.2;
    J(i + 3, i + 1) = 19.8;
  }
  return J;
}

Entries wood_pattern(int n) {
  Entries e;
  for (int i = 0; i < n; i += 4) {
    e.insert(e.end(), {{i, i}, {i, i + 1}, {i + 1, i}, {i + 1, i + 1}, {i + 1, i + 3},
                       {i + 2, i + 2}, {i + 2, i + 3}, {i + 3, i + 2}, {i + 3, i + 3},
                       {i + 3, i + 1}});
  }
  return e;
}

// ---------------------------------------------------------------------------
// Broyden tridiagonal, x_0 = x_{n+1} = 0.
//   G_i = (3 - 2 x_i) x_i - x_{i-1} - 2 x_{i+1} + 1
// Singular Broyden squares each component: F_i = G_i^2.

double broyden_row(const Vector& x, Eigen::Index i) {
  const double left = i > 0 ? x[i - 1] : 0.0;
  const double right = i + 1 < x.size() ? x[i + 1] : 0.0;
  return (3.0 - 2.0 * x[i]) * x[i] - left - 2.0 * right + 1.0;
}

Vector broyden_tridiagonal_F(const Vector& x) {
  Vector f(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) f[i] = broyden_row(x, i);
  return f;
}

Matrix broyden_tridiagonal_J(const Vector& x) {
  const auto n = x.size();
  Matrix J = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    J(i, i) = 3.0 - 4.0 * x[i];
    if (i > 0) J(i, i - 1) = -1.0;
    if (i + 1 < n) J(i, i + 1) = -2.0;
  }
  return J;
}

Vector singular_broyden_F(const Vector& x) {
  Vector f(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double g = broyden_row(x, i);
    f[i] = g * g;
  }
  return f;
}

Matrix singular_broyden_J(const Vector& x) {
  Matrix J = broyden_tridiagonal_J(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) J.row(i) *= 2.0 * broyden_row(x, i);
  return J;
}

// ---------------------------------------------------------------------------
// Extended Powell singular, blocks of four.
//   F_1 = x_1 + 10 x_2,  F_2 = sqrt5 (x_3 - x_4),
//   F_3 = (x_2 - 2 x_3)^2,  F_4 = sqrt10 (x_1 - x_4)^2

Vector powell_F(const Vector& x) {
  const double r5 = std::sqrt(5.0), r10 = std::sqrt(10.0);
  Vector f(x.size());
  for (Eigen::Index i = 0; i < x.size(); i += 4) {
    const double a = x[i], b = x[i + 1], c = x[i + 2], d = x[i + 3];
    f[i] = a + 10.0 * b;
    f[i + 1] = r5 * (c - d);
    f[i + 2] = (b - 2.0 * c) * (b - 2.0 * c);
    f[i + 3] = r10 * (a - d) * (a - d);
  }
  return f;
}

Matrix powell_J(const Vector& x) {
  const double r5 = std::sqrt(5.0), r10 = std::sqrt(10.0);
  Matrix J = Matrix::Zero(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); i += 4) {
    const double a = x[i], b = x[i + 1], c = x[i + 2], d = x[i + 3];
    J(i, i) = 1.0;
    J(i, i + 1) = 10.0;
    J(i + 1, i + 2) = r5;
    J(i + 1, i + 3) = -r5;
    J(i + 2, i + 1) = 2.0 * (b - 2.0 * c);
    J(i + 2, i + 2) = -4.0 * (b - 2.0 * c);
    J(i + 3, i) = 2.0 * r10 * (a - d);
    J(i + 3, i + 3) = -2.0 * r10 * (a - d);
  }
  return J;
}

Entries powell_pattern(int n) {
  Entries e;
  for (int i = 0; i < n; i += 4) {
    e.insert(e.end(), {{i, i}, {i, i + 1}, {i + 1, i + 2}, {i + 1, i + 3}, {i + 2, i + 1},
                       {i + 2, i + 2}, {i + 3, i}, {i + 3, i + 3}});
  }
  return e;
}

// ---------------------------------------------------------------------------
// Structured Jacobian: Broyden-like tridiagonal part plus a coupling term
// shared by every row,
//   T = 3 x_{n-4} - x_{n-3} - x_{n-2} + 0.5 x_{n-1} - x_n + 1
//   F_i = -2 x_i^2 + 3 x_i - x_{i-1} - 2 x_{i+1} + T   (x_0 = x_{n+1} = 0)

constexpr double kStructuredCoupling[5] = {3.0, -1.0, -1.0, 0.5, -1.0};

Vector structured_F(const Vector& x) {
  const auto n = x.size();
  double t = 1.0;
  for (int c = 0; c < 5; ++c) t += kStructuredCoupling[c] * x[n - 5 + c];
  Vector f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = i > 0 ? x[i - 1] : 0.0;
    const double right = i + 1 < n ? x[i + 1] : 0.0;
    f[i] = -2.0 * x[i] * x[i] + 3.0 * x[i] - left - 2.0 * right + t;
  }
  return f;
}

Matrix structured_J(const Vector& x) {
  const auto n = x.size();
  Matrix J = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    J(i, i) = -4.0 * x[i] + 3.0;
    if (i > 0) J(i, i - 1) = -1.0;
    if (i + 1 < n) J(i, i + 1) = -2.0;
    for (int c = 0; c < 5; ++c) J(i, n - 5 + c) += kStructuredCoupling[c];
  }
  return J;
}

Entries structured_pattern(int n) {
  Entries e = banded(n, 1, 1);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 5; ++c) e.emplace_back(i, n - 5 + c);
  return e;
}

// ---------------------------------------------------------------------------
// Brent, x_0 = 0 and x_{n+1} = 20.
//   F_i = 3 x_i (x_{i+1} - 2 x_i + x_{i-1}) + (x_{i+1} - x_{i-1})^2 / 4

Vector brent_F(const Vector& x) {
  const auto n = x.size();
  Vector f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = i > 0 ? x[i - 1] : 0.0;
    const double right = i + 1 < n ? x[i + 1] : 20.0;
    f[i] = 3.0 * x[i] * (right - 2.0 * x[i] + left) + 0.25 * (right - left) * (right - left);
  }
  return f;
}

Matrix brent_J(const Vector& x) {
  const auto n = x.size();
  Matrix J = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = i > 0 ? x[i - 1] : 0.0;
    const double right = i + 1 < n ? x[i + 1] : 20.0;
    J(i, i) = 3.0 * (right - 4.0 * x[i] + left);
    if (i > 0) J(i, i - 1) = 3.0 * x[i] - 0.5 * (right - left);
    if (i + 1 < n) J(i, i + 1) = 3.0 * x[i] + 0.5 * (right - left);
  }
  return J;
}

// ---------------------------------------------------------------------------
// Trigonometric function (i 1-based).
//   F_i = 2 (n + i (1 - cos x_i) - sin x_i - sum_j cos x_j) (2 sin x_i - cos x_i)

Vector trigonometric_F(const Vector& x) {
  const auto n = x.size();
  const double csum = x.array().cos().sum();
  Vector f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = std::cos(x[i]), s = std::sin(x[i]);
    const double a = static_cast<double>(n) + static_cast<double>(i + 1) * (1.0 - c) - s - csum;
    f[i] = 2.0 * a * (2.0 * s - c);
  }
  return f;
}

Matrix trigonometric_J(const Vector& x) {
  const auto n = x.size();
  const Vector cosx = x.array().cos();
  const Vector sinx = x.array().sin();
  const double csum = cosx.sum();
  Matrix J(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = cosx[i], s = sinx[i];
    const double a = static_cast<double>(n) + static_cast<double>(i + 1) * (1.0 - c) - s - csum;
    const double b = 2.0 * s - c;
    for (Eigen::Index j = 0; j < n; ++j) J(i, j) = 2.0 * b * sinx[j];
    J(i, i) += 2.0 * b * (static_cast<double>(i + 1) * s - c) + 2.0 * a * (2.0 * c + s);
  }
  return J;
}

// ---------------------------------------------------------------------------

std::vector<ProblemSpec> build_registry() {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<ProblemSpec> r;
  auto add = [&](ProblemSpec s) { r.push_back(std::move(s)); };
  add({"effati_grosan_2", 1, "Effati-Grosan problem 2", "Nikas-Grapsa 2010", 2, 1, 2, false,
       -10, 10, {1, 2, 3}, false});
  add({"reactor", 2, "Reactor R = 0.935", "Nikas-Grapsa 2010", 2, 1, 2, false, 0, 5, {1, 2, 3},
       false});
  add({"merlet", 3, "Merlet", "Nikas-Grapsa 2010", 2, 1, 2, false, 0, two_pi, {1, 2, 3}, false});
  add({"brown_almost_linear", 4, "Brown's almost linear system", "Moré-Garbow-Hillstrom", 5, 1,
       2, true, -2, 2, {2.5, 3.5, 4.5}, true});
  add({"countercurrent_reactors_2", 5, "Countercurrent reactors 2", "Lukšan-Vlček 4.2", 8, 1, 8,
       false, -100, 10, {0, 1, 2}, false});
  add({"chemical_reaction", 6, "Chemical reaction problem", "Bellavia et al.", 67, 1, 67, false,
       -20, 20, {0, 1, 2}, false});
  add({"yamamura", 7, "Yamamura", "Nikas-Grapsa 2010", 100, 1, 1, true, -100, 100, {1, 2, 3},
       false});
  add({"extended_freudenstein_roth", 8, "Extended Freudenstein-Roth", "Lukšan-Vlček 4.11", 100, 2,
       2, true, -100, 100, {1, 2, 3}, true});
  add({"tridiagonal_system", 9, "Tridiagonal system", "Lukšan-Vlček 4.7", 100, 1, 2, true, -5, 5,
       {1, 2, 3.5}, true});
  add({"extended_wood", 10, "Extended Wood", "Lukšan-Vlček 4.17", 100, 4, 4, true, -5, 5,
       {1, 2, 3.5}, true});
  add({"singular_broyden", 11, "Singular Broyden", "Lukšan-Vlček 4.6", 100, 1, 1, true, -100, 1,
       {1, 2, 3}, true});
  add({"powell_singular_ext", 12, "Extended Powell singular", "Lukšan-Vlček 4.12", 100, 4, 4,
       true, -5, 5, {1, 2, 3}, true});
  add({"broyden_tridiagonal", 13, "Broyden tridiagonal", "Moré-Garbow-Hillstrom 30", 500, 1, 1,
       true, -100, 0, {1, 2, 3}, true});
  add({"structured_jacobian", 14, "Structured Jacobian", "Lukšan-Vlček 3.19", 500, 1, 5, true,
       -100, 0, {1, 2, 3}, true});
  add({"brent", 15, "Brent", "Lukšan-Vlček 4.20", 500, 1, 1, true, -100, 100, {1, 2, 3}, true});
  add({"bratu", 16, "Bratu", "Lukšan-Vlček 4.24", 1024, 1, 1, true, -100, 1.5, {1, 2, 3}, false});
  add({"trigonometric", 17, "Trigonometric function", "La Cruz-Martínez-Raydan 2003", 2000, 1, 1,
       true, -50, 150, {0, 1, 2}, true});
  return r;
}

}  // namespace

const std::vector<ProblemSpec>& problem_registry() {
  static const std::vector<ProblemSpec> registry = build_registry();
  return registry;
}

const ProblemSpec& find_problem_spec(const std::string& name) {
  for (const auto& s : problem_registry())
    if (s.name == name) return s;
  throw UnknownProblem("unknown problem '" + name + "'");
}

Problem make_problem(const std::string& name, int n) {
  const ProblemSpec& spec = find_problem_spec(name);
  if (!spec.available) {
    throw UnknownProblem("problem '" + name + "' is registered but its residual is not shipped");
  }
  if (n <= 0) n = spec.default_n;
  if (!spec.scalable && n != spec.default_n) {
    throw ConfigError(name + " has fixed dimension " + std::to_string(spec.default_n));
  }
  if (n < spec.n_min || n % spec.n_multiple != 0) {
    throw ConfigError(name + " needs n >= " + std::to_string(spec.n_min) + " and a multiple of " +
                      std::to_string(spec.n_multiple));
  }

  Problem p;
  p.name = name;
  p.n = n;
  p.set = std::make_shared<BoxSet>(BoxSet::uniform(n, spec.lower, spec.upper));

  if (name == "brown_almost_linear") {
    p.F = brown_F;
    p.jac = brown_J;
  } else if (name == "extended_freudenstein_roth") {
    p.F = freudenstein_roth_F;
    p.jac = freudenstein_roth_J;
    p.pattern = SparsityPattern::from_entries(n, pairwise_blocks(n));
  } else if (name == "tridiagonal_system") {
    p.F = tridiagonal_system_F;
    p.jac = tridiagonal_system_J;
    p.pattern = SparsityPattern::from_entries(n, banded(n, 1, 1));
  } else if (name == "extended_wood") {
    p.F = wood_F;
    p.jac = wood_J;
    p.pattern = SparsityPattern::from_entries(n, wood_pattern(n));
  } else if (name == "singular_broyden") {
    p.F = singular_broyden_F;
    p.jac = singular_broyden_J;
    p.pattern = SparsityPattern::from_entries(n, banded(n, 1, 1));
  } else if (name == "powell_singular_ext") {
    p.F = powell_F;
    p.jac = powell_J;
    p.pattern = SparsityPattern::from_entries(n, powell_pattern(n));
  } else if (name == "broyden_tridiagonal") {
    p.F = broyden_tridiagonal_F;
    p.jac = broyden_tridiagonal_J;
    p.pattern = SparsityPattern::from_entries(n, banded(n, 1, 1));
  } else if (name == "structured_jacobian") {
    p.F = structured_F;
    p.jac = structured_J;
    p.pattern = SparsityPattern::from_entries(n, structured_pattern(n));
  } else if (name == "brent") {
    p.F = brent_F;
    p.jac = brent_J;
    p.pattern = SparsityPattern::from_entries(n, banded(n, 1, 1));
  } else if (name == "trigonometric") {
    p.F = trigonometric_F;
    p.jac = trigonometric_J;
  } else {
    throw UnknownProblem("no residual registered for '" + name + "'");
  }
  return p;
}

Vector starting_point(const Problem& problem, double gamma) {
  const auto* box = dynamic_cast<const BoxSet*>(problem.set.get());
  if (box == nullptr) throw UnsupportedOperation("starting_point needs a box feasible set");
  const double t = 0.2 * gamma;
  if (!(gamma >= 0.0) || t > 1.0) {
    throw ConfigError("gamma must satisfy 0 <= 0.2 gamma <= 1 to start inside the box");
  }
  return box->lower() + t * (box->upper() - box->lower());
}

std::optional<Vector> known_root(const std::string& name, int n) {
  if (name == "brown_almost_linear" || name == "tridiagonal_system" || name == "extended_wood") {
    return Vector::Ones(n);
  }
  if (name == "powell_singular_ext" || name == "trigonometric") return Vector::Zero(n);
  if (name == "extended_freudenstein_roth") {
    Vector r(n);
    for (int i = 0; i < n; i += 2) {
      r[i] = 5.0;
      r[i + 1] = 4.0;
    }
    return r;
  }
  return std::nullopt;
}

}  // namespace giqn
