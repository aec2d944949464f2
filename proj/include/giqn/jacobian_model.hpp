#pragma once

#include <cstdint>
#include <optional>

#include "giqn/core.hpp"

namespace giqn {

/// LU pivot below 1e-14 * ||M||_inf.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Row-update guard: rows whose masked step has ||d||^2 <= this are skipped.
inline constexpr double kRowStepFloor = 1e-30;
inline constexpr double kSingularPivotFactor = 1e-14;

/// Forward-difference Jacobian. Column j uses h_j = sqrt(eps_mach) max(1, |x_j|);
/// the perturbed point may leave C. Adds n to `evals`. Entries outside
/// `pattern` (when given) are zeroed. Throws EvaluationError on non-finite
/// residuals.
Matrix fd_jacobian(const ResidualFn& F, const Vector& x, const Vector& Fx,
                   const SparsityPattern* pattern, std::int64_t& evals);

/// Broyden-Schubert sparse secant update, in place. For each row i with
/// d = dx restricted to the row's pattern columns and ||d||^2 > kRowStepFloor:
///   row_i += (dF_i - <row_i, dx>) / ||d||^2 * d^T.
/// Updated rows satisfy <row_i, dx> = dF_i. A dense pattern gives Broyden's
/// rank-one update.
void schubert_update(Matrix& M, const SparsityPattern& pattern, const Vector& dx,
                     const Vector& dF);

/// Bogle-Perkins sparse secant update, in place.
///
/// Least relative change per row: minimise sum_j (dM_ij / M_ij)^2 over the
/// pattern subject to the row secant equation. With weights w_j = M_ij^2,
///   row_i += (dF_i - <row_i, dx>) / (sum_j w_j dx_j^2) * (w_j dx_j)_j.
/// Large entries absorb most of the correction and structural zeros of the
/// current estimate are kept. When the weighted denominator is <= kRowStepFloor
/// but the masked step is not, the row falls back to the Schubert row formula.
/// Either way updated rows satisfy the secant equation.
void bogle_perkins_update(Matrix& M, const SparsityPattern& pattern, const Vector& dx,
                          const Vector& dF);

/// True on k = 0 and whenever (k - 1) mod period == 0.
bool should_refresh(int k, int period);

/// M s = -F(x_k) + r.
struct StepResult {
  Vector s;
  Vector r;
  double r_norm_ratio = 0.0;  // ||r|| / ||F(x_k)||
  int krylov_iterations = 0;  // 0 for direct solves
};

/// Owns M_k and its cached LU factorisation for a single solve.
class JacobianModel {
 public:
  JacobianModel(JacobianStrategy strategy, SparsityPattern pattern);

  JacobianStrategy strategy() const { return strategy_; }
  const SparsityPattern& pattern() const { return pattern_; }
  const Matrix& matrix() const { return M_; }
  int last_refresh_k() const { return last_refresh_k_; }

  void set_matrix(Matrix m);

  /// Builds M_k for iteration k: a fresh FD (or analytic) Jacobian when the
  /// strategy or refresh schedule asks for one, otherwise the pending secant
  /// pair is folded into M. Returns true when M was rebuilt from scratch.
  bool prepare(int k, const Problem& problem, const Vector& x, const Vector& Fx, int period,
               std::int64_t& jac_evals);

  /// Rebuilds M from finite differences at x.
  void refresh_fd(const Problem& problem, const Vector& x, const Vector& Fx,
                  std::int64_t& jac_evals, int k);

  /// Stores (x_{k+1} - x_k, F(x_{k+1}) - F(x_k)) for the next quasi-Newton update.
  void record_secant_pair(Vector dx, Vector dF);

  /// Applies the strategy's secant update with an explicit pair.
  void apply_update(const Vector& dx, const Vector& dF);

  /// M += shift * I (singular fallback).
  void shift_diagonal(double shift);

  /// Direct LU solve when `forcing` is absent (or zero), otherwise GMRES
  /// stopped at ||M s + Fx|| <= c2 ||Fx||. Throws SingularMatrixError.
  StepResult solve_step(const Vector& Fx, std::optional<double> forcing);

 private:
  void factorize();

  JacobianStrategy strategy_;
  SparsityPattern pattern_;
  Matrix M_;
  Eigen::PartialPivLU<Matrix> lu_;
  bool factorized_ = false;
  bool singular_ = false;
  int last_refresh_k_ = -1;
  std::optional<std::pair<Vector, Vector>> pending_;
};

/// Free-function form of JacobianModel::solve_step.
StepResult solve_step(JacobianModel& model, const Vector& Fx, std::optional<double> forcing);

/// Max absolute row sum.
double norm_inf(const Matrix& m);

}  // namespace giqn
