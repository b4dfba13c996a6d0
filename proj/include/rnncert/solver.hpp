#pragma once

#include <chrono>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rnncert::solver {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEq, GreaterEq, Equal };

struct LinearTerm {
  int var;
  double coef;
};

struct Row {
  std::vector<LinearTerm> terms;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

/// Linear program over bounded variables:
///   optimize  c'x + c0   s.t.  rows,  lower <= x <= upper.
/// Infinite bounds are allowed as long as the rows keep the problem well-posed.
struct LpProblem {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> names;  // optional, used by dump_lp
  std::vector<Row> rows;
  std::vector<double> objective;  // empty means all-zero (feasibility problem)
  double objective_constant = 0.0;
  bool maximize = false;

  int add_variable(double lo, double hi, std::string name = {}) {
    lower.push_back(lo);
    upper.push_back(hi);
    names.push_back(std::move(name));
    return static_cast<int>(lower.size()) - 1;
  }

  void add_row(std::vector<LinearTerm> terms, Relation rel, double rhs) {
    rows.push_back(Row{std::move(terms), rel, rhs});
  }

  void set_objective_coef(int var, double coef) {
    if (static_cast<int>(objective.size()) <= var) objective.resize(lower.size(), 0.0);
    objective[var] = coef;
  }

  int num_vars() const { return static_cast<int>(lower.size()); }
};

/// An LpProblem plus a designated set of binary variables (bounds forced to
/// a sub-range of [0,1] during branching).
struct MilpProblem {
  LpProblem lp;
  std::vector<int> binaries;

  void mark_binary(int var) { binaries.push_back(var); }
};

enum class SolveStatus {
  Optimal,
  Infeasible,
  Unbounded,
  NumericalFailure,
  BudgetExceeded,
};

const char* to_string(SolveStatus s);

struct SolveStats {
  long pivots = 0;
  long phase1_pivots = 0;
  long nodes = 0;
  long refactorizations = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> assignment;
  SolveStats stats;
};

struct Tolerances {
  double feasibility = 1e-7;
  double integrality = 1e-6;
  double optimality = 1e-6;
};

/// Work limits. Wall-clock deadlines give hard runtime guarantees; the pivot
/// and node caps are deterministic, so budget-limited runs reproduce exactly.
struct SolveBudget {
  std::optional<std::chrono::steady_clock::time_point> deadline;
  long max_pivots = -1;  // -1 = unlimited
  long max_nodes = -1;

  static SolveBudget unlimited() { return {}; }
  static SolveBudget wall_ms(long ms) {
    SolveBudget b;
    b.deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
    return b;
  }
};

SolveResult solve_lp(const LpProblem& p, const Tolerances& tol = {},
                     const SolveBudget& budget = {});

SolveResult solve_milp(const MilpProblem& p, const Tolerances& tol = {},
                       const SolveBudget& budget = {});

struct ReluEncoding {
  std::optional<int> binary;  // absent when the phase is fixed by the bounds
};

/// Adds constraints (and, for sign-unstable bounds, one binary variable) so
/// that the feasible assignments of (x, y) project exactly onto
/// {(x, max(0, x)) : lo <= x <= hi}. Bounds must be finite.
ReluEncoding encode_relu(MilpProblem& p, int x_var, int y_var, double lo, double hi);

/// Writes the problem in LP text format for external cross-checking.
void dump_lp(const LpProblem& p, std::ostream& os, const std::vector<int>& binaries = {});

}  // namespace rnncert::solver
