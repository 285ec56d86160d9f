#pragma once

// Dense linear-program container and a deterministic two-phase simplex solver.
//
// Problems are always maximizations. Variables carry a finite lower bound
// (0 by default) and an optional upper bound; constraints are `<=`, `>=` or `=`.
// The solver works on a condensed tableau (basic rows x nonbasic columns), so
// the cost of a pivot does not grow with the number of slack variables.

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hdrelay::lp {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  std::optional<double> upper;
  double objective = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

class LinearProgram {
 public:
  int add_variable(std::string name, double objective = 0.0, double lower = 0.0,
                   std::optional<double> upper = std::nullopt);
  int add_constraint(std::string name, std::vector<Term> terms, Relation relation, double rhs);

  void set_objective(int var, double coef) { vars_.at(static_cast<std::size_t>(var)).objective = coef; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  std::size_t num_nonzeros() const;

  /// Human-readable dump: one `max:` line, one line per constraint, then bounds.
  void write_text(std::ostream& out) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, Numerical, Invalid };

const char* to_string(Status status);

enum class PivotRule {
  Bland,
  /// Largest reduced cost, switching to Bland's rule after a run of degenerate pivots.
  DantzigBland,
};

struct SolverOptions {
  PivotRule rule = PivotRule::Bland;
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  std::size_t max_nonzeros = 50'000;
  std::size_t max_iterations = 1'000'000;
  /// Pivots between recomputing the tableau from an LU factorization of the basis
  /// (at least the row count).
  std::size_t refactor_interval = 64;
};

struct LpSolution {
  Status status = Status::Invalid;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> primal;
  /// One multiplier per constraint. For an optimal maximization, `<=` rows have
  /// nonnegative duals, `>=` rows nonpositive, and c - A^T y <= 0 on free columns.
  std::vector<double> dual;
  double max_violation = 0.0;
  std::size_t iterations = 0;
  std::string message;

  bool optimal() const { return status == Status::Optimal; }
};

LpSolution solve(const LinearProgram& lp, const SolverOptions& options = {});

/// Largest violation of constraints and variable bounds at `x`.
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace hdrelay::lp
