#pragma once

// Domain types shared by every stage of the solver: problem data, solver
// configuration, the nonmonotone growth schedule, iterate state and the
// run report.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace giqn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

class FeasibleSet;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Residual or Jacobian evaluation produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class InfeasibleStart : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Sparsity

/// Structural nonzero set of an n x n Jacobian, stored as sorted column lists
/// per row. A default-constructed pattern of size n is dense.
class SparsityPattern {
 public:
  SparsityPattern() = default;

  static SparsityPattern dense(int n);
  static SparsityPattern from_entries(int n, std::vector<std::pair<int, int>> entries);

  int size() const { return n_; }
  bool is_dense() const { return dense_; }
  bool contains(int row, int col) const;

  /// Columns of `row` that may be nonzero, ascending.
  const std::vector<int>& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }

  std::size_t nonzeros() const;

  /// Zeroes every entry of `m` outside the pattern.
  void mask(Matrix& m) const;

 private:
  int n_ = 0;
  bool dense_ = true;
  std::vector<std::vector<int>> rows_;
};

// ---------------------------------------------------------------------------
// Problem

/// F : Omega -> R^n with C a subset of Omega. `jac` and `pattern` are optional.
struct Problem {
  std::string name;
  int n = 0;
  ResidualFn F;
  JacobianFn jac;
  std::optional<SparsityPattern> pattern;
  std::shared_ptr<const FeasibleSet> set;

  bool has_jacobian() const { return static_cast<bool>(jac); }

  /// Pattern if supplied, dense otherwise.
  SparsityPattern structure() const;

  /// Evaluates F and checks shape and finiteness.
  Vector evaluate(const Vector& x) const;

  /// Evaluates the analytic Jacobian and checks shape and finiteness.
  Matrix jacobian(const Vector& x) const;
};

// ---------------------------------------------------------------------------
// Configuration

/// eta_k = a^k (b + ||F(x0)||^2). Summable with total (b + f0_sq) / (1 - a).
struct EtaSchedule {
  double a = 0.99;
  double b = 100.0;
  double f0_sq = 0.0;

  double total() const { return (b + f0_sq) / (1.0 - a); }
};

double eta(const EtaSchedule& schedule, int k);

enum class JacobianStrategy {
  FiniteDifference,
  BroydenSchubert,
  BoglePerkins,
  /// M_k = F'(x_k) from the problem's analytic Jacobian.
  Analytic,
};

std::string_view to_string(JacobianStrategy strategy);
/// Accepts the short CLI names (fd, bsu, bpu, exact) and the enum spellings.
JacobianStrategy parse_strategy(std::string_view name);

struct SolverConfig {
  double alpha = 1e-4;
  double sigma = 0.5;
  /// Constant CondG tolerance multiplier. Overridden per iteration by
  /// `theta_schedule` when that is set.
  double theta = 1e-5;
  std::function<double(int)> theta_schedule;
  EtaSchedule eta_schedule;
  double tol_inf = 1e-6;
  int max_iter = 300;
  int condg_max_iter = 300;
  double lambda_min = 1e-12;
  JacobianStrategy jacobian_strategy = JacobianStrategy::FiniteDifference;
  int refresh_period = 5;
  /// c2 forcing term. Absent means direct solves with r_k at roundoff.
  std::optional<double> forcing;
  /// Consecutive iterations with a bit-identical ||F||_inf before giving up.
  int stagnation_window = 50;
  /// Record ||F'(x_k) s~_k + F(x_k)|| / ||F(x_k)|| when an analytic Jacobian exists.
  bool record_linearized_residual = false;

  double theta_at(int k) const { return theta_schedule ? theta_schedule(k) : theta; }

  /// Throws ConfigError on any violated parameter range.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Iteration state and report

enum class AcceptBranch { Desc1Plus, Desc1Minus, Desc2Plus, Desc2Minus };

std::string_view to_string(AcceptBranch branch);

inline bool is_desc1(AcceptBranch b) {
  return b == AcceptBranch::Desc1Plus || b == AcceptBranch::Desc1Minus;
}

struct IterateState {
  int k = 0;
  Vector x;
  Vector Fx;
  double norm2 = 0.0;
  double norm_inf = 0.0;
  double lambda_last = 0.0;
  std::int64_t fe_count = 0;
  std::int64_t jac_fe_count = 0;
  std::int64_t condg_iters_total = 0;
  std::optional<AcceptBranch> branch_last;

  /// Replaces the cached point and recomputes the norms from Fx.
  void set_point(Vector x_new, Vector Fx_new);
};

enum class SolveStatus { Converged, MaxIterations, NoProgress, LinearSolveFailure };

std::string_view to_string(SolveStatus status);
SolveStatus parse_status(std::string_view name);

/// Recovery applied when the linear solve hit a singular M_k.
enum class SingularFallback { None, FiniteDifference, DiagonalShift };

/// One accepted outer iteration k -> k+1.
struct IterationRecord {
  int k = 0;
  double norm = 0.0;      // ||F(x_k)||
  double norm_inf = 0.0;  // ||F(x_k)||_inf
  double norm_next = 0.0; // ||F(x_{k+1})||
  double eta_k = 0.0;
  double lambda = 0.0;
  int backtracks = 0;     // lambda = sigma^backtracks
  AcceptBranch branch = AcceptBranch::Desc1Plus;
  int trial_evals = 0;
  double step_norm = 0.0;    // ||p_k||
  double s_norm = 0.0;       // ||s_k||
  double s_tilde_norm = 0.0; // ||s~_k||
  double linear_residual_ratio = 0.0;  // ||r_k|| / ||F(x_k)||
  bool used_condg = false;
  int condg_iterations = 0;
  bool condg_capped = false;
  bool refreshed = false;
  SingularFallback fallback = SingularFallback::None;
  bool feasible = true;  // x_{k+1} in C
  std::optional<double> linearized_residual;
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  std::int64_t fe_count = 0;
  std::int64_t jac_fe_count = 0;
  std::int64_t condg_iters_total = 0;
  double time_seconds = 0.0;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  double final_norm_inf = 0.0;
  Vector x;
  EtaSchedule eta_schedule;
  std::vector<IterationRecord> trace;
};

/// f(x) = 1/2 ||F(x)||^2.
double merit(const Vector& Fx);

double norm_inf(const Vector& v);

}  // namespace giqn
