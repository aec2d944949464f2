#include "giqn/core.hpp"

#include <algorithm>
#include <cmath>

namespace giqn {

SparsityPattern SparsityPattern::dense(int n) {
  SparsityPattern p;
  p.n_ = n;
  p.dense_ = true;
  p.rows_.assign(static_cast<std::size_t>(n), {});
  for (auto& r : p.rows_) {
    r.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) r[static_cast<std::size_t>(j)] = j;
  }
  return p;
}

SparsityPattern SparsityPattern::from_entries(int n, std::vector<std::pair<int, int>> entries) {
  SparsityPattern p;
  p.n_ = n;
  p.rows_.assign(static_cast<std::size_t>(n), {});
  for (const auto& [i, j] : entries) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw DimensionMismatch("sparsity entry out of range");
    }
    p.rows_[static_cast<std::size_t>(i)].push_back(j);
  }
  std::size_t total = 0;
  for (auto& r : p.rows_) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    total += r.size();
  }
  p.dense_ = total == static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  return p;
}

bool SparsityPattern::contains(int row, int col) const {
  if (dense_) return row >= 0 && row < n_ && col >= 0 && col < n_;
  const auto& r = rows_[static_cast<std::size_t>(row)];
  return std::binary_search(r.begin(), r.end(), col);
}

std::size_t SparsityPattern::nonzeros() const {
  std::size_t total = 0;
  for (const auto& r : rows_) total += r.size();
  return total;
}

void SparsityPattern::mask(Matrix& m) const {
  if (m.rows() != n_ || m.cols() != n_) throw DimensionMismatch("pattern/matrix size mismatch");
  if (dense_) return;
  for (int i = 0; i < n_; ++i) {
    const auto& cols = rows_[static_cast<std::size_t>(i)];
    auto it = cols.begin();
    for (int j = 0; j < n_; ++j) {
      if (it != cols.end() && *it == j) {
        ++it;
      } else {
        m(i, j) = 0.0;
      }
    }
  }
}

SparsityPattern Problem::structure() const {
  return pattern ? *pattern : SparsityPattern::dense(n);
}

Vector Problem::evaluate(const Vector& x) const {
  if (x.size() != n) throw DimensionMismatch("evaluate: x has wrong dimension");
  Vector fx = F(x);
  if (fx.size() != n) throw DimensionMismatch("evaluate: F returned wrong dimension");
  if (!fx.allFinite()) throw EvaluationError("F produced a non-finite value");
  return fx;
}

Matrix Problem::jacobian(const Vector& x) const {
  if (!jac) throw UnsupportedOperation("problem has no analytic Jacobian");
  if (x.size() != n) throw DimensionMismatch("jacobian: x has wrong dimension");
  Matrix j = jac(x);
  if (j.rows() != n || j.cols() != n) throw DimensionMismatch("jacobian: wrong shape");
  if (!j.allFinite()) throw EvaluationError("Jacobian produced a non-finite value");
  return j;
}

double eta(const EtaSchedule& schedule, int k) {
  return std::pow(schedule.a, k) * (schedule.b + schedule.f0_sq);
}

std::string_view to_string(JacobianStrategy strategy) {
  switch (strategy) {
    case JacobianStrategy::FiniteDifference: return "fd";
    case JacobianStrategy::BroydenSchubert: return "bsu";
    case JacobianStrategy::BoglePerkins: return "bpu";
    case JacobianStrategy::Analytic: return "exact";
  }
  return "?";
}

JacobianStrategy parse_strategy(std::string_view name) {
  if (name == "fd" || name == "FiniteDifference") return JacobianStrategy::FiniteDifference;
  if (name == "bsu" || name == "BroydenSchubert") return JacobianStrategy::BroydenSchubert;
  if (name == "bpu" || name == "BoglePerkins") return JacobianStrategy::BoglePerkins;
  if (name == "exact" || name == "Analytic") return JacobianStrategy::Analytic;
  throw ConfigError("unknown Jacobian strategy '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
  if (!(sigma > 0.0 && sigma < 1.0)) fail("sigma must lie in (0,1)");
  if (!(theta >= 0.0)) fail("theta must be >= 0");
  if (!(eta_schedule.a > 0.0 && eta_schedule.a < 1.0)) fail("eta base must lie in (0,1)");
  if (!(eta_schedule.b + eta_schedule.f0_sq > 0.0)) fail("eta offset must make eta_k positive");
  if (!(tol_inf > 0.0)) fail("tol_inf must be > 0");
  if (max_iter < 0) fail("max_iter must be >= 0");
  if (condg_max_iter < 1) fail("condg_max_iter must be >= 1");
  if (!(lambda_min > 0.0 && lambda_min < 1.0)) fail("lambda_min must lie in (0,1)");
  if (refresh_period < 1) fail("refresh_period must be >= 1");
  if (forcing && !(*forcing >= 0.0)) fail("forcing term must be >= 0");
  if (stagnation_window < 1) fail("stagnation_window must be >= 1");
}

std::string_view to_string(AcceptBranch branch) {
  switch (branch) {
    case AcceptBranch::Desc1Plus: return "desc1-plus";
    case AcceptBranch::Desc1Minus: return "desc1-minus";
    case AcceptBranch::Desc2Plus: return "desc2-plus";
    case AcceptBranch::Desc2Minus: return "desc2-minus";
  }
  return "?";
}

void IterateState::set_point(Vector x_new, Vector Fx_new) {
  x = std::move(x_new);
  Fx = std::move(Fx_new);
  norm2 = Fx.norm();
  norm_inf = giqn::norm_inf(Fx);
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::NoProgress: return "NoProgress";
    case SolveStatus::LinearSolveFailure: return "LinearSolveFailure";
  }
  return "?";
}

SolveStatus parse_status(std::string_view name) {
  for (auto s : {SolveStatus::Converged, SolveStatus::MaxIterations, SolveStatus::NoProgress,
                 SolveStatus::LinearSolveFailure}) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown solve status '" + std::string(name) + "'");
}

double merit(const Vector& Fx) { return 0.5 * Fx.squaredNorm(); }

double norm_inf(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace giqn
