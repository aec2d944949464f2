#include "giqn/jacobian_model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace giqn {

namespace {

void check_pair(const Matrix& M, const SparsityPattern& pattern, const Vector& dx,
                const Vector& dF) {
  const auto n = M.rows();
  if (M.cols() != n || dx.size() != n || dF.size() != n || pattern.size() != n) {
    throw DimensionMismatch("quasi-Newton update: dimension mismatch");
  }
}

double masked_step_sq(const SparsityPattern& pattern, int i, const Vector& dx) {
  double acc = 0.0;
  for (int j : pattern.row(i)) acc += dx[j] * dx[j];
  return acc;
}

void schubert_row(Matrix& M, const SparsityPattern& pattern, int i, const Vector& dx,
                  double residual, double dd) {
  const double coef = residual / dd;
  for (int j : pattern.row(i)) M(i, j) += coef * dx[j];
}

// Unrestarted GMRES from s = 0, stopped on the true residual target.
StepResult gmres(const Matrix& M, const Vector& Fx, double target) {
  const auto n = M.rows();
  const Vector b = -Fx;
  const double beta = b.norm();
  StepResult out;
  out.s = Vector::Zero(n);
  if (beta <= target) return out;

  const auto max_k = n;
  Matrix V(n, max_k + 1);
  Matrix H = Matrix::Zero(max_k + 1, max_k);
  Vector g = Vector::Zero(max_k + 1);
  std::vector<double> cs(static_cast<std::size_t>(max_k)), sn(static_cast<std::size_t>(max_k));
  V.col(0) = b / beta;
  g[0] = beta;

  Eigen::Index k = 0;
  for (; k < max_k; ++k) {
    Vector w = M * V.col(k);
    for (Eigen::Index i = 0; i <= k; ++i) {
      H(i, k) = w.dot(V.col(i));
      w -= H(i, k) * V.col(i);
    }
    H(k + 1, k) = w.norm();
    if (H(k + 1, k) > 0.0) V.col(k + 1) = w / H(k + 1, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      const double t = cs[iu] * H(i, k) + sn[iu] * H(i + 1, k);
      H(i + 1, k) = -sn[iu] * H(i, k) + cs[iu] * H(i + 1, k);
      H(i, k) = t;
    }
    const double denom = std::hypot(H(k, k), H(k + 1, k));
    const auto ku = static_cast<std::size_t>(k);
    cs[ku] = denom == 0.0 ? 1.0 : H(k, k) / denom;
    sn[ku] = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
    H(k, k) = denom;
    H(k + 1, k) = 0.0;
    g[k + 1] = -sn[ku] * g[k];
    g[k] = cs[ku] * g[k];
    if (std::abs(g[k + 1]) <= 0.5 * target || H(k + 1, k) == 0.0) {
      ++k;
      break;
    }
  }
  const Vector y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
  out.s = V.leftCols(k) * y;
  out.krylov_iterations = static_cast<int>(k);
  return out;
}

}  // namespace

double norm_inf(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix fd_jacobian(const ResidualFn& F, const Vector& x, const Vector& Fx,
                   const SparsityPattern* pattern, std::int64_t& evals) {
  const auto n = x.size();
  if (Fx.size() != n) throw DimensionMismatch("fd_jacobian: F(x) has wrong dimension");
  if (!x.allFinite()) throw EvaluationError("fd_jacobian: non-finite point");
  const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Matrix J(n, n);
  Vector xp = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h0 = root_eps * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h0;
    // Use the step actually representable in floating point.
    const double h = xp[j] - x[j];
    const Vector Fp = F(xp);
    ++evals;
    if (Fp.size() != n) throw DimensionMismatch("fd_jacobian: F returned wrong dimension");
    if (!Fp.allFinite()) {
      throw EvaluationError("fd_jacobian: non-finite residual in column " + std::to_string(j));
    }
    J.col(j) = (Fp - Fx) / h;
    xp[j] = x[j];
  }
  if (pattern != nullptr) pattern->mask(J);
  return J;
}

void schubert_update(Matrix& M, const SparsityPattern& pattern, const Vector& dx,
                     const Vector& dF) {
  check_pair(M, pattern, dx, dF);
  const int n = static_cast<int>(M.rows());
  for (int i = 0; i < n; ++i) {
    const double dd = masked_step_sq(pattern, i, dx);
    if (dd <= kRowStepFloor) continue;
    schubert_row(M, pattern, i, dx, dF[i] - M.row(i).dot(dx), dd);
  }
}

void bogle_perkins_update(Matrix& M, const SparsityPattern& pattern, const Vector& dx,
                          const Vector& dF) {
  check_pair(M, pattern, dx, dF);
  const int n = static_cast<int>(M.rows());
  for (int i = 0; i < n; ++i) {
    const double dd = masked_step_sq(pattern, i, dx);
    if (dd <= kRowStepFloor) continue;
    const double residual = dF[i] - M.row(i).dot(dx);
    double weighted = 0.0;
    for (int j : pattern.row(i)) weighted += M(i, j) * M(i, j) * dx[j] * dx[j];
    if (weighted <= kRowStepFloor) {
      schubert_row(M, pattern, i, dx, residual, dd);
      continue;
    }
    const double coef = residual / weighted;
    for (int j : pattern.row(i)) M(i, j) += coef * M(i, j) * M(i, j) * dx[j];
  }
}

bool should_refresh(int k, int period) {
  if (k < 0 || period < 1) throw ConfigError("should_refresh: need k >= 0 and period >= 1");
  return k == 0 || (k - 1) % period == 0;
}

JacobianModel::JacobianModel(JacobianStrategy strategy, SparsityPattern pattern)
    : strategy_(strategy), pattern_(std::move(pattern)) {}

void JacobianModel::set_matrix(Matrix m) {
  if (m.rows() != pattern_.size() || m.cols() != pattern_.size()) {
    throw DimensionMismatch("JacobianModel: matrix does not match pattern size");
  }
  M_ = std::move(m);
  factorized_ = false;
}

void JacobianModel::refresh_fd(const Problem& problem, const Vector& x, const Vector& Fx,
                               std::int64_t& jac_evals, int k) {
  set_matrix(fd_jacobian(problem.F, x, Fx, problem.pattern ? &pattern_ : nullptr, jac_evals));
  last_refresh_k_ = k;
}

bool JacobianModel::prepare(int k, const Problem& problem, const Vector& x, const Vector& Fx,
                            int period, std::int64_t& jac_evals) {
  switch (strategy_) {
    case JacobianStrategy::FiniteDifference:
      refresh_fd(problem, x, Fx, jac_evals, k);
      pending_.reset();
      return true;
    case JacobianStrategy::Analytic:
      set_matrix(problem.jacobian(x));
      last_refresh_k_ = k;
      pending_.reset();
      return true;
    case JacobianStrategy::BroydenSchubert:
    case JacobianStrategy::BoglePerkins:
      if (should_refresh(k, period) || M_.size() == 0) {
        refresh_fd(problem, x, Fx, jac_evals, k);
        pending_.reset();
        return true;
      }
      if (pending_) {
        apply_update(pending_->first, pending_->second);
        pending_.reset();
      }
      return false;
  }
  return false;
}

void JacobianModel::record_secant_pair(Vector dx, Vector dF) {
  pending_.emplace(std::move(dx), std::move(dF));
}

void JacobianModel::apply_update(const Vector& dx, const Vector& dF) {
  if (strategy_ == JacobianStrategy::BoglePerkins) {
    bogle_perkins_update(M_, pattern_, dx, dF);
  } else {
    schubert_update(M_, pattern_, dx, dF);
  }
  factorized_ = false;
}

void JacobianModel::shift_diagonal(double shift) {
  M_.diagonal().array() += shift;
  factorized_ = false;
}

void JacobianModel::factorize() {
  if (factorized_) return;
  if (M_.size() == 0) throw SingularMatrixError("JacobianModel: no matrix to factorize");
  lu_.compute(M_);
  const double threshold = kSingularPivotFactor * norm_inf(M_);
  singular_ = false;
  for (Eigen::Index i = 0; i < M_.rows(); ++i) {
    const double pivot = std::abs(lu_.matrixLU()(i, i));
    if (pivot == 0.0 || pivot < threshold || !std::isfinite(pivot)) {
      singular_ = true;
      break;
    }
  }
  factorized_ = true;
}

StepResult JacobianModel::solve_step(const Vector& Fx, std::optional<double> forcing) {
  if (Fx.size() != M_.rows()) throw DimensionMismatch("solve_step: F(x) has wrong dimension");
  factorize();
  if (singular_) throw SingularMatrixError("M_k is numerically singular");

  const double fnorm = Fx.norm();
  StepResult out;
  if (forcing && *forcing > 0.0) {
    const double target = *forcing * fnorm;
    out = gmres(M_, Fx, target);
    out.r = M_ * out.s + Fx;
    // GMRES tracks the residual through recurrences; fall back to the direct
    // solve if the true residual drifted past the target.
    if (out.r.norm() > target) {
      out.s = lu_.solve(-Fx);
      out.r = M_ * out.s + Fx;
      out.krylov_iterations = 0;
    }
  } else {
    out.s = lu_.solve(-Fx);
    out.r = M_ * out.s + Fx;
  }
  if (!out.s.allFinite()) throw SingularMatrixError("linear solve produced a non-finite step");
  out.r_norm_ratio = fnorm > 0.0 ? out.r.norm() / fnorm : 0.0;
  return out;
}

StepResult solve_step(JacobianModel& model, const Vector& Fx, std::optional<double> forcing) {
  return model.solve_step(Fx, forcing);
}

}  // namespace giqn
