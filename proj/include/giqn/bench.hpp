#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "giqn/core.hpp"
#include "giqn/solver.hpp"

namespace giqn {

struct BenchTriple {
  std::string problem;
  int n = 0;  // 0 selects the registry default
  double gamma = 1.0;
  JacobianStrategy strategy = JacobianStrategy::FiniteDifference;
};

/// One CSV row. Metrics are present only for converged runs; failed runs
/// keep the identifying fields and the status.
struct BenchRow {
  std::string problem;
  int n = 0;
  double gamma = 0.0;
  std::string strategy;
  SolveStatus status = SolveStatus::MaxIterations;
  std::optional<int> iterations;
  std::optional<std::int64_t> fe;
  std::optional<std::int64_t> jac_fe;
  std::optional<double> time_seconds;
  std::optional<double> final_norm_inf;

  bool operator==(const BenchRow&) const = default;
};

struct BenchRun {
  BenchTriple triple;
  BenchRow row;
  SolveReport report;
  std::vector<InvariantCheck> invariants;
};

/// Validates every triple (problem, dimension, gamma) before solving any,
/// then runs one solve per triple. Results come back in input order whether
/// or not the runs execute concurrently.
std::vector<BenchRun> run_benchmark_detailed(const std::vector<BenchTriple>& selection,
                                             const SolverConfig& cfg, bool parallel = false);

std::vector<BenchRow> run_benchmark(const std::vector<BenchTriple>& selection,
                                    const SolverConfig& cfg, bool parallel = false);

/// Every shipped problem at its default n and listed gammas, for each strategy.
std::vector<BenchTriple> full_sweep(const std::vector<JacobianStrategy>& strategies);

enum class OutputFormat { Csv, Table };

OutputFormat parse_format(std::string_view name);

inline constexpr const char* kCsvHeader =
    "problem,n,gamma,strategy,status,iterations,fe,jac_fe,time_seconds,final_norm_inf";

/// Shortest decimal string that parses back to the same double.
std::string format_number(double value);

void emit(const std::vector<BenchRow>& rows, OutputFormat format, std::ostream& out);

/// Inverse of emit(rows, Csv, ...). Throws Error on malformed input.
std::vector<BenchRow> parse_csv(std::istream& in);

/// CSV with the time_seconds column blanked, for run-to-run comparison.
std::string csv_without_time(const std::vector<BenchRow>& rows);

/// Harness settings: solver parameters plus the experiment matrix.
struct BenchSettings {
  SolverConfig solver;
  std::vector<std::string> problems;
  std::vector<double> gammas;
  /// Empty means fd for an explicit selection and fd, bsu, bpu for `all`.
  std::vector<JacobianStrategy> methods;
  int n = 0;
  bool all = false;
  bool serial = false;
  OutputFormat format = OutputFormat::Table;
  std::string out;
};

/// Reads `key = value` lines ('#' starts a comment). Keys are the
/// SolverConfig field names plus problems, gammas, methods, n, all, serial,
/// format and out. Throws ConfigError on unknown keys or bad values.
void apply_config(BenchSettings& settings, std::istream& in);

/// Applies a single key/value pair using the same rules as apply_config.
void apply_setting(BenchSettings& settings, const std::string& key, const std::string& value);

/// Cartesian product problems x gammas x methods, or full_sweep(methods) when
/// `all` is set. An empty gamma list takes each problem's registered gammas.
/// The result is empty when no problem is selected.
std::vector<BenchTriple> expand_selection(const BenchSettings& settings);

}  // namespace giqn
