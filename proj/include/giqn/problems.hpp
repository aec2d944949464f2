#pragma once

#include <optional>
#include <string>
#include <vector>

#include "giqn/core.hpp"

namespace giqn {

class UnknownProblem : public Error {
 public:
  using Error::Error;
};

/// Registry entry for a box-constrained benchmark problem.
struct ProblemSpec {
  std::string name;          // stable snake_case identifier
  int table_id = 0;          // row in the benchmark table (Pb 1..17)
  std::string title;
  std::string source;
  int default_n = 0;
  int n_multiple = 1;        // n must be a multiple of this
  int n_min = 1;
  bool scalable = true;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> gammas;
  /// False for problems whose residual is not shipped; they can be listed
  /// but make_problem throws.
  bool available = true;
};

const std::vector<ProblemSpec>& problem_registry();

/// Throws UnknownProblem.
const ProblemSpec& find_problem_spec(const std::string& name);

/// Builds F, the analytic Jacobian, its sparsity pattern and the box.
/// n <= 0 selects the default dimension. Throws UnknownProblem for unknown
/// or unavailable names and ConfigError for incompatible dimensions.
Problem make_problem(const std::string& name, int n = 0);

/// x0(gamma) = l + 0.2 gamma (u - l). Requires 0 <= 0.2 gamma <= 1 and a
/// box feasible set.
Vector starting_point(const Problem& problem, double gamma);

/// A solution inside the box, when the defining source gives one in
/// closed form.
std::optional<Vector> known_root(const std::string& name, int n);

}  // namespace giqn
