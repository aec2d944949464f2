#include "giqn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "giqn/problems.hpp"

namespace giqn {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_value(std::string_view text, const std::string& what) {
  T value{};
  const auto s = trim(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("cannot parse " + what + " from '" + s + "'");
  }
  return value;
}

bool parse_bool(const std::string& value, const std::string& key) {
  const auto v = trim(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("cannot parse boolean '" + key + "' from '" + v + "'");
}

BenchRow make_row(const BenchTriple& t, int n, const SolveReport& report) {
  BenchRow row;
  row.problem = t.problem;
  row.n = n;
  row.gamma = t.gamma;
  row.strategy = std::string(to_string(t.strategy));
  row.status = report.status;
  if (report.status == SolveStatus::Converged) {
    row.iterations = report.iterations;
    row.fe = report.fe_count;
    row.jac_fe = report.jac_fe_count;
    row.time_seconds = report.time_seconds;
    row.final_norm_inf = report.final_norm_inf;
  }
  return row;
}

template <typename T>
std::string opt_field(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_number(*v);
  } else {
    return std::to_string(*v);
  }
}

}  // namespace

std::vector<BenchRun> run_benchmark_detailed(const std::vector<BenchTriple>& selection,
                                             const SolverConfig& cfg, bool parallel) {
  cfg.validate();
  struct Prepared {
    Problem problem;
    Vector x0;
  };
  std::vector<Prepared> prepared;
  prepared.reserve(selection.size());
  for (const auto& t : selection) {
    Problem p = make_problem(t.problem, t.n);
    if (t.strategy == JacobianStrategy::Analytic && !p.has_jacobian()) {
      throw ConfigError(t.problem + " has no analytic Jacobian");
    }
    Vector x0 = starting_point(p, t.gamma);
    prepared.push_back({std::move(p), std::move(x0)});
  }

  std::vector<BenchRun> runs(selection.size());
  auto run_one = [&](std::size_t i) {
    SolverConfig c = cfg;
    c.jacobian_strategy = selection[i].strategy;
    BenchRun& run = runs[i];
    run.triple = selection[i];
    try {
      run.report = solve(prepared[i].problem, prepared[i].x0, c);
    } catch (const EvaluationError& e) {
      std::cerr << "warning: " << selection[i].problem << " gamma=" << selection[i].gamma
                << ": " << e.what() << '\n';
      run.report = SolveReport{};
      run.report.status = SolveStatus::NoProgress;
      run.report.final_norm = std::numeric_limits<double>::infinity();
      run.report.final_norm_inf = std::numeric_limits<double>::infinity();
    }
    run.row = make_row(selection[i], prepared[i].problem.n, run.report);
    run.invariants = check_run_invariants(run.report, c);
  };

  const unsigned workers =
      parallel ? std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                 static_cast<unsigned>(selection.size())))
               : 1u;
  if (workers <= 1) {
    for (std::size_t i = 0; i < selection.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < selection.size(); i = next++) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return runs;
}

std::vector<BenchRow> run_benchmark(const std::vector<BenchTriple>& selection,
                                    const SolverConfig& cfg, bool parallel) {
  std::vector<BenchRow> rows;
  for (auto& run : run_benchmark_detailed(selection, cfg, parallel)) rows.push_back(run.row);
  return rows;
}

std::vector<BenchTriple> full_sweep(const std::vector<JacobianStrategy>& strategies) {
  std::vector<BenchTriple> out;
  for (const auto& spec : problem_registry()) {
    if (!spec.available) continue;
    for (auto strategy : strategies)
      for (double g : spec.gammas) out.push_back({spec.name, spec.default_n, g, strategy});
  }
  return out;
}

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "table") return OutputFormat::Table;
  throw ConfigError("unknown output format '" + std::string(name) + "'");
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error("format_number: conversion failed");
  return std::string(buf, ptr);
}

void emit(const std::vector<BenchRow>& rows, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
      out << r.problem << ',' << r.n << ',' << format_number(r.gamma) << ',' << r.strategy << ','
          << to_string(r.status) << ',' << opt_field(r.iterations) << ',' << opt_field(r.fe)
          << ',' << opt_field(r.jac_fe) << ',' << opt_field(r.time_seconds) << ','
          << opt_field(r.final_norm_inf) << '\n';
    }
    return;
  }

  const std::vector<std::string> header = {"problem", "n",   "gamma",  "strategy", "status",
                                           "It",      "Fe",  "JacFe",  "Time(s)",  "||F||inf"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    const bool ok = r.status == SolveStatus::Converged;
    std::ostringstream t, f;
    if (r.time_seconds) t << std::setprecision(3) << std::scientific << *r.time_seconds;
    if (r.final_norm_inf) f << std::setprecision(2) << std::scientific << *r.final_norm_inf;
    cells.push_back({r.problem, std::to_string(r.n), format_number(r.gamma), r.strategy,
                     ok ? std::string(to_string(r.status)) : "* " + std::string(to_string(r.status)),
                     opt_field(r.iterations), opt_field(r.fe), opt_field(r.jac_fe), t.str(),
                     f.str()});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& v) {
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (c > 0) out << "  ";
      if (c < 5) {
        out << std::left << std::setw(static_cast<int>(width[c])) << v[c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c])) << v[c];
      }
    }
    out << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total - 2, '-') << '\n';
  for (const auto& row : cells) line(row);
  out << std::left;
}

std::vector<BenchRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) {
    throw Error("parse_csv: missing or unexpected header");
  }
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) throw Error("parse_csv: expected 10 fields in '" + line + "'");
    BenchRow r;
    r.problem = f[0];
    r.n = parse_value<int>(f[1], "n");
    r.gamma = parse_value<double>(f[2], "gamma");
    r.strategy = f[3];
    r.status = parse_status(f[4]);
    if (!f[5].empty()) r.iterations = parse_value<int>(f[5], "iterations");
    if (!f[6].empty()) r.fe = parse_value<std::int64_t>(f[6], "fe");
    if (!f[7].empty()) r.jac_fe = parse_value<std::int64_t>(f[7], "jac_fe");
    if (!f[8].empty()) r.time_seconds = parse_value<double>(f[8], "time_seconds");
    if (!f[9].empty()) r.final_norm_inf = parse_value<double>(trim(f[9]), "final_norm_inf");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string csv_without_time(const std::vector<BenchRow>& rows) {
  std::vector<BenchRow> copy = rows;
  for (auto& r : copy) r.time_seconds.reset();
  std::ostringstream os;
  emit(copy, OutputFormat::Csv, os);
  return os.str();
}

void apply_setting(BenchSettings& s, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  SolverConfig& c = s.solver;
  if (key == "alpha") {
    c.alpha = parse_value<double>(value, key);
  } else if (key == "sigma") {
    c.sigma = parse_value<double>(value, key);
  } else if (key == "theta") {
    c.theta = parse_value<double>(value, key);
  } else if (key == "eta_a") {
    c.eta_schedule.a = parse_value<double>(value, key);
  } else if (key == "eta_b") {
    c.eta_schedule.b = parse_value<double>(value, key);
  } else if (key == "tol_inf" || key == "tol") {
    c.tol_inf = parse_value<double>(value, key);
  } else if (key == "max_iter") {
    c.max_iter = parse_value<int>(value, key);
  } else if (key == "condg_max_iter") {
    c.condg_max_iter = parse_value<int>(value, key);
  } else if (key == "lambda_min") {
    c.lambda_min = parse_value<double>(value, key);
  } else if (key == "refresh_period") {
    c.refresh_period = parse_value<int>(value, key);
  } else if (key == "forcing") {
    if (value.empty() || value == "none") {
      c.forcing.reset();
    } else {
      c.forcing = parse_value<double>(value, key);
    }
  } else if (key == "stagnation_window") {
    c.stagnation_window = parse_value<int>(value, key);
  } else if (key == "jacobian_strategy") {
    c.jacobian_strategy = parse_strategy(value);
    s.methods = {c.jacobian_strategy};
  } else if (key == "methods" || key == "method") {
    s.methods.clear();
    for (const auto& m : split(value, ',')) s.methods.push_back(parse_strategy(trim(m)));
  } else if (key == "problems" || key == "problem") {
    s.problems.clear();
    for (const auto& p : split(value, ','))
      if (!trim(p).empty()) s.problems.push_back(trim(p));
  } else if (key == "gammas" || key == "gamma") {
    s.gammas.clear();
    for (const auto& g : split(value, ',')) s.gammas.push_back(parse_value<double>(g, "gamma"));
  } else if (key == "n") {
    s.n = parse_value<int>(value, key);
  } else if (key == "all") {
    s.all = parse_bool(value, key);
  } else if (key == "serial") {
    s.serial = parse_bool(value, key);
  } else if (key == "format") {
    s.format = parse_format(value);
  } else if (key == "out") {
    s.out = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_config(BenchSettings& settings, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    apply_setting(settings, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::vector<BenchTriple> expand_selection(const BenchSettings& s) {
  using enum JacobianStrategy;
  if (s.all) {
    return full_sweep(s.methods.empty()
                          ? std::vector{FiniteDifference, BroydenSchubert, BoglePerkins}
                          : s.methods);
  }
  const auto methods = s.methods.empty() ? std::vector{FiniteDifference} : s.methods;
  std::vector<BenchTriple> out;
  for (const auto& name : s.problems) {
    const auto& gammas = s.gammas.empty() ? find_problem_spec(name).gammas : s.gammas;
    for (auto m : methods)
      for (double g : gammas) out.push_back({name, s.n, g, m});
  }
  return out;
}

}  // namespace giqn
