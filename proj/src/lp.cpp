#include "hdrelay/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

namespace hdrelay::lp {

int LinearProgram::add_variable(std::string name, double objective, double lower,
                                std::optional<double> upper) {
  vars_.push_back(Variable{std::move(name), lower, upper, objective});
  return static_cast<int>(vars_.size()) - 1;
}

int LinearProgram::add_constraint(std::string name, std::vector<Term> terms, Relation relation,
                                  double rhs) {
  rows_.push_back(Constraint{std::move(name), std::move(terms), relation, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

std::size_t LinearProgram::num_nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.terms.size();
  for (const auto& v : vars_) n += v.upper ? 1 : 0;
  return n;
}

namespace {

const char* relation_text(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::GreaterEqual: return ">=";
    case Relation::Equal: return "=";
  }
  return "?";
}

std::string var_label(const LinearProgram& lp, int j) {
  const auto& name = lp.variables()[static_cast<std::size_t>(j)].name;
  return name.empty() ? "x" + std::to_string(j) : name;
}

void write_terms(std::ostream& out, const LinearProgram& lp, const std::vector<Term>& terms) {
  if (terms.empty()) {
    out << "0";
    return;
  }
  bool first = true;
  for (const auto& t : terms) {
    if (!first) out << (t.coef < 0 ? " - " : " + ");
    else if (t.coef < 0) out << "-";
    out << std::abs(t.coef) << " " << var_label(lp, t.var);
    first = false;
  }
}

}  // namespace

void LinearProgram::write_text(std::ostream& out) const {
  std::vector<Term> obj;
  for (std::size_t j = 0; j < vars_.size(); ++j)
    if (vars_[j].objective != 0.0) obj.push_back({static_cast<int>(j), vars_[j].objective});
  out << "max: ";
  write_terms(out, *this, obj);
  out << "\n";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    out << (r.name.empty() ? "c" + std::to_string(i) : r.name) << ": ";
    write_terms(out, *this, r.terms);
    out << " " << relation_text(r.relation) << " " << r.rhs << "\n";
  }
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    out << "bound " << var_label(*this, static_cast<int>(j)) << " >= " << vars_[j].lower;
    if (vars_[j].upper) out << ", <= " << *vars_[j].upper;
    out << "\n";
  }
}

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration-limit";
    case Status::Numerical: return "numerical-failure";
    case Status::Invalid: return "invalid";
  }
  return "unknown";
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  const auto& vars = lp.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    worst = std::max(worst, vars[j].lower - x[j]);
    if (vars[j].upper) worst = std::max(worst, x[j] - *vars[j].upper);
  }
  for (const auto& r : lp.constraints()) {
    double lhs = 0.0;
    for (const auto& t : r.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    switch (r.relation) {
      case Relation::LessEqual: worst = std::max(worst, lhs - r.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, r.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - r.rhs)); break;
    }
  }
  return worst;
}

namespace {

constexpr double kRelativePivot = 1e-3;
constexpr double kTie = 1e-12;
constexpr double kAcceptedViolation = 1e-8;

// Condensed tableau. Each basic row reads  x_B[r] + sum_j T[r][j] x_N[j] = b[r],
// and the objective reads  z = z0 + sum_j d[j] x_N[j].
class Tableau {
 public:
  enum class Kind { Structural, Slack, Artificial, Surplus };

  Tableau(const LinearProgram& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) {}

  LpSolution run();

 private:
  struct RowInfo {
    int source = -1;  // constraint index, or -1 for an upper-bound row
    double sign = 1.0;
    int row_var = 0;  // slack or artificial initially basic in this row
  };

  double& at(std::size_t r, std::size_t c) { return t_[r * cols_ + c]; }

  void build();
  void pivot(std::size_t r, std::size_t q);
  Status iterate(const std::vector<double>& d, bool phase_one);
  std::optional<std::size_t> choose_entering(const std::vector<double>& d, bool bland) const;
  std::optional<std::size_t> choose_leaving(std::size_t q, bool bland) const;
  void drive_out_artificials();
  void refactor();
  std::vector<double> current_primal() const;
  double current_violation() const { return max_violation(lp_, current_primal()); }

  const LinearProgram& lp_;
  const SolverOptions& opt_;

  std::size_t n_ = 0;  // structural count
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> t_;
  std::vector<double> b_;
  std::vector<double> d1_, d2_;
  double z1_ = 0.0, z2_ = 0.0;
  std::vector<int> basic_;     // var id per row
  std::vector<int> nonbasic_;  // var id per column
  std::vector<Kind> kind_;     // per var id
  std::vector<bool> dead_;     // per var id
  std::vector<RowInfo> info_;
  std::vector<double> shift_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;

  // Original system for reinversion; the dense matrix over every var id is built on first use.
  std::vector<double> t0_;
  std::vector<double> b0_;
  std::vector<int> nonbasic0_;
  Eigen::MatrixXd a0_;
  std::vector<double> c1_, c2_;
  double z2_const_ = 0.0;
};

void Tableau::build() {
  const auto& vars = lp_.variables();
  const auto& cons = lp_.constraints();
  n_ = vars.size();
  shift_.resize(n_);
  for (std::size_t j = 0; j < n_; ++j) shift_[j] = vars[j].lower;

  struct Row {
    const std::vector<Term>* terms;  // null for the upper-bound row of `bounded`
    int bounded;
    double rhs;
    Relation rel;
    int source;
  };
  std::vector<Row> rows;
  rows.reserve(cons.size() + n_);
  for (std::size_t i = 0; i < cons.size(); ++i) {
    double rhs = cons[i].rhs;
    for (const auto& t : cons[i].terms) rhs -= t.coef * shift_[static_cast<std::size_t>(t.var)];
    rows.push_back({&cons[i].terms, -1, rhs, cons[i].relation, static_cast<int>(i)});
  }
  for (std::size_t j = 0; j < n_; ++j)
    if (vars[j].upper && std::isfinite(*vars[j].upper))
      rows.push_back({nullptr, static_cast<int>(j), *vars[j].upper - vars[j].lower, Relation::LessEqual, -1});

  rows_ = rows.size();
  kind_.assign(n_, Kind::Structural);
  info_.resize(rows_);
  basic_.resize(rows_);
  b_.resize(rows_);
  std::vector<int> surplus_of_row(rows_, -1);

  for (std::size_t i = 0; i < rows_; ++i) {
    auto& row = rows[i];
    double sign = 1.0;
    if (row.rhs < 0.0) {
      sign = -1.0;
      row.rhs = -row.rhs;
      if (row.rel == Relation::LessEqual) row.rel = Relation::GreaterEqual;
      else if (row.rel == Relation::GreaterEqual) row.rel = Relation::LessEqual;
    }
    info_[i].source = row.source;
    info_[i].sign = sign;
    int id = static_cast<int>(kind_.size());
    kind_.push_back(row.rel == Relation::LessEqual ? Kind::Slack : Kind::Artificial);
    info_[i].row_var = id;
    basic_[i] = id;
    b_[i] = row.rhs;
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (rows[i].rel != Relation::GreaterEqual) continue;
    surplus_of_row[i] = static_cast<int>(kind_.size());
    kind_.push_back(Kind::Surplus);
  }
  dead_.assign(kind_.size(), false);

  for (std::size_t j = 0; j < n_; ++j) nonbasic_.push_back(static_cast<int>(j));
  for (std::size_t i = 0; i < rows_; ++i)
    if (surplus_of_row[i] >= 0) nonbasic_.push_back(surplus_of_row[i]);
  cols_ = nonbasic_.size();

  t_.assign(rows_ * cols_, 0.0);
  std::vector<std::size_t> col_of_surplus(kind_.size(), 0);
  for (std::size_t c = 0; c < cols_; ++c) col_of_surplus[static_cast<std::size_t>(nonbasic_[c])] = c;
  for (std::size_t i = 0; i < rows_; ++i) {
    if (rows[i].terms) {
      for (const auto& t : *rows[i].terms) at(i, static_cast<std::size_t>(t.var)) += info_[i].sign * t.coef;
    } else {
      at(i, static_cast<std::size_t>(rows[i].bounded)) = info_[i].sign;
    }
    if (surplus_of_row[i] >= 0) at(i, col_of_surplus[static_cast<std::size_t>(surplus_of_row[i])]) = -1.0;
  }

  t0_ = t_;
  b0_.assign(b_.begin(), b_.end());
  nonbasic0_ = nonbasic_;
  c1_.assign(kind_.size(), 0.0);
  c2_.assign(kind_.size(), 0.0);
  for (std::size_t v = 0; v < kind_.size(); ++v)
    if (kind_[v] == Kind::Artificial) c1_[v] = -1.0;
  for (std::size_t j = 0; j < n_; ++j) c2_[j] = vars[j].objective;

  d2_.assign(cols_, 0.0);
  z2_ = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    d2_[j] = vars[j].objective;
    z2_ += vars[j].objective * shift_[j];
  }
  z2_const_ = z2_;
  d1_.assign(cols_, 0.0);
  z1_ = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    if (kind_[static_cast<std::size_t>(basic_[i])] != Kind::Artificial) continue;
    z1_ -= b_[i];
    for (std::size_t c = 0; c < cols_; ++c) d1_[c] += at(i, c);
  }
}

void Tableau::pivot(std::size_t r, std::size_t q) {
  const double p = at(r, q);
  double* prow = &t_[r * cols_];
  for (std::size_t j = 0; j < cols_; ++j) prow[j] /= p;
  prow[q] = 1.0 / p;
  b_[r] /= p;

  for (std::size_t i = 0; i < rows_; ++i) {
    if (i == r) continue;
    double* row = &t_[i * cols_];
    const double f = row[q];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
    row[q] = -f / p;
    b_[i] -= f * b_[r];
  }
  auto update_objective = [&](std::vector<double>& d, double& z) {
    const double f = d[q];
    if (f == 0.0) return;
    for (std::size_t j = 0; j < cols_; ++j) d[j] -= f * prow[j];
    d[q] = -f / p;
    z += f * b_[r];
  };
  update_objective(d1_, z1_);
  update_objective(d2_, z2_);
  std::swap(basic_[r], nonbasic_[q]);
  if (kind_[static_cast<std::size_t>(nonbasic_[q])] == Kind::Artificial)
    dead_[static_cast<std::size_t>(nonbasic_[q])] = true;
  ++iterations_;
  ++since_refactor_;
}

std::optional<std::size_t> Tableau::choose_entering(const std::vector<double>& d, bool bland) const {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < cols_; ++j) {
    if (dead_[static_cast<std::size_t>(nonbasic_[j])]) continue;
    if (d[j] <= opt_.optimality_tolerance) continue;
    if (!best) {
      best = j;
    } else if (bland) {
      if (nonbasic_[j] < nonbasic_[*best]) best = j;
    } else if (d[j] > d[*best]) {
      best = j;
    }
  }
  return best;
}

std::optional<std::size_t> Tableau::choose_leaving(std::size_t q, bool bland) const {
  // Harris two-pass test: rows whose ratio is within the feasibility tolerance of the
  // minimum are candidates; tiny pivots among them are skipped.
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows_; ++i) {
    const double a = t_[i * cols_ + q];
    if (a > opt_.pivot_tolerance) bound = std::min(bound, (std::max(b_[i], 0.0) + opt_.feasibility_tolerance) / a);
  }
  if (!std::isfinite(bound)) return std::nullopt;
  double largest = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double a = t_[i * cols_ + q];
    if (a > opt_.pivot_tolerance && std::max(b_[i], 0.0) / a <= bound) largest = std::max(largest, a);
  }
  std::optional<std::size_t> best;
  double best_ratio = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double a = t_[i * cols_ + q];
    if (a < kRelativePivot * largest || a <= opt_.pivot_tolerance) continue;
    const double ratio = std::max(b_[i], 0.0) / a;
    if (ratio > bound) continue;
    bool better;
    if (!best) better = true;
    else if (bland) better = ratio < best_ratio - kTie || (ratio <= best_ratio + kTie && basic_[i] < basic_[*best]);
    else better = a > t_[*best * cols_ + q];
    if (better) {
      best = i;
      best_ratio = ratio;
    }
  }
  return best;
}

std::vector<double> Tableau::current_primal() const {
  std::vector<double> x(shift_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto v = static_cast<std::size_t>(basic_[i]);
    if (v < n_) x[v] += std::max(b_[i], 0.0);
  }
  return x;
}

void Tableau::refactor() {
  since_refactor_ = 0;
  if (rows_ == 0) return;
  const auto m = static_cast<Eigen::Index>(rows_);
  if (a0_.size() == 0) {
    a0_ = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(kind_.size()));
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto ri = static_cast<Eigen::Index>(i);
      a0_(ri, info_[i].row_var) = 1.0;
      for (std::size_t c = 0; c < cols_; ++c) a0_(ri, nonbasic0_[c]) = t0_[i * cols_ + c];
    }
  }
  Eigen::MatrixXd basis(m, m);
  for (Eigen::Index i = 0; i < m; ++i) basis.col(i) = a0_.col(basic_[static_cast<std::size_t>(i)]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
  Eigen::MatrixXd nonbasic(m, static_cast<Eigen::Index>(cols_));
  for (std::size_t c = 0; c < cols_; ++c) nonbasic.col(static_cast<Eigen::Index>(c)) = a0_.col(nonbasic_[c]);
  const Eigen::MatrixXd t = lu.solve(nonbasic);
  const Eigen::VectorXd b = lu.solve(Eigen::Map<const Eigen::VectorXd>(b0_.data(), m));
  if (!t.allFinite() || !b.allFinite()) return;
  for (std::size_t i = 0; i < rows_; ++i) {
    b_[i] = b(static_cast<Eigen::Index>(i));
    for (std::size_t c = 0; c < cols_; ++c) at(i, c) = t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
  }
  auto reprice = [&](const std::vector<double>& cost, std::vector<double>& d, double& z, double z0) {
    z = z0;
    for (std::size_t i = 0; i < rows_; ++i) z += cost[static_cast<std::size_t>(basic_[i])] * b_[i];
    for (std::size_t c = 0; c < cols_; ++c) {
      double v = cost[static_cast<std::size_t>(nonbasic_[c])];
      for (std::size_t i = 0; i < rows_; ++i) v -= cost[static_cast<std::size_t>(basic_[i])] * at(i, c);
      d[c] = v;
    }
  };
  reprice(c1_, d1_, z1_, 0.0);
  reprice(c2_, d2_, z2_, z2_const_);
}

Status Tableau::iterate(const std::vector<double>& d, bool phase_one) {
  std::size_t degenerate_run = 0;
  bool bland = opt_.rule == PivotRule::Bland;
  for (;;) {
    if (iterations_ >= opt_.max_iterations) return Status::IterationLimit;
    if (since_refactor_ >= std::max(opt_.refactor_interval, rows_)) refactor();
    auto q = choose_entering(d, bland);
    if (!q) {
      if (since_refactor_ == 0 || current_violation() <= opt_.feasibility_tolerance) return Status::Optimal;
      refactor();
      q = choose_entering(d, bland);
      if (!q) return Status::Optimal;
    }
    auto r = choose_leaving(*q, bland);
    if (!r) return phase_one ? Status::Infeasible : Status::Unbounded;
    if (b_[*r] <= opt_.feasibility_tolerance) {
      if (++degenerate_run > 50) bland = true;
    } else {
      degenerate_run = 0;
      bland = opt_.rule == PivotRule::Bland;
    }
    pivot(*r, *q);
  }
}

void Tableau::drive_out_artificials() {
  for (std::size_t r = 0; r < rows_; ++r) {
    if (kind_[static_cast<std::size_t>(basic_[r])] != Kind::Artificial) continue;
    std::optional<std::size_t> q;
    double best = opt_.pivot_tolerance;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (dead_[static_cast<std::size_t>(nonbasic_[j])]) continue;
      const double a = std::abs(at(r, j));
      if (a > best) {
        best = a;
        q = j;
      }
    }
    if (q) pivot(r, *q);
  }
}

LpSolution Tableau::run() {
  LpSolution sol;
  build();

  bool needs_phase_one = false;
  for (std::size_t i = 0; i < rows_; ++i)
    if (kind_[static_cast<std::size_t>(basic_[i])] == Kind::Artificial) needs_phase_one = true;

  if (needs_phase_one) {
    Status s = iterate(d1_, true);
    if (s == Status::IterationLimit) {
      sol.status = s;
      sol.iterations = iterations_;
      sol.message = "iteration limit in phase one";
      return sol;
    }
    if (z1_ < -opt_.feasibility_tolerance) {
      sol.status = Status::Infeasible;
      sol.iterations = iterations_;
      std::ostringstream msg;
      msg << "infeasible (phase-one residual " << -z1_ << ")";
      sol.message = msg.str();
      return sol;
    }
    drive_out_artificials();
  }
  // Artificials that are nonbasic never come back.
  for (std::size_t c = 0; c < cols_; ++c)
    if (kind_[static_cast<std::size_t>(nonbasic_[c])] == Kind::Artificial)
      dead_[static_cast<std::size_t>(nonbasic_[c])] = true;

  Status s = iterate(d2_, false);
  sol.status = s;
  sol.iterations = iterations_;
  if (s != Status::Optimal) {
    sol.message = s == Status::Unbounded ? "objective unbounded" : "iteration limit in phase two";
    return sol;
  }

  sol.primal = current_primal();

  std::vector<double> reduced(kind_.size(), 0.0);
  for (std::size_t c = 0; c < cols_; ++c) reduced[static_cast<std::size_t>(nonbasic_[c])] = d2_[c];
  sol.dual.assign(lp_.num_constraints(), 0.0);
  for (const auto& info : info_) {
    if (info.source < 0) continue;
    sol.dual[static_cast<std::size_t>(info.source)] =
        -info.sign * reduced[static_cast<std::size_t>(info.row_var)];
  }

  double obj = 0.0;
  const auto& vars = lp_.variables();
  for (std::size_t j = 0; j < n_; ++j) obj += vars[j].objective * sol.primal[j];
  sol.objective = obj;
  sol.max_violation = max_violation(lp_, sol.primal);
  return sol;
}

std::string validate(const LinearProgram& lp, const SolverOptions& opt) {
  if (lp.num_nonzeros() > opt.max_nonzeros) {
    return "problem has " + std::to_string(lp.num_nonzeros()) + " nonzeros, limit is " +
           std::to_string(opt.max_nonzeros);
  }
  const auto& vars = lp.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (!std::isfinite(vars[j].lower) || !std::isfinite(vars[j].objective) ||
        (vars[j].upper && std::isnan(*vars[j].upper)))
      return "variable " + std::to_string(j) + " has a non-finite bound or cost";
  }
  const auto& rows = lp.constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(rows[i].rhs)) return "constraint " + std::to_string(i) + " has a non-finite rhs";
    for (const auto& t : rows[i].terms) {
      if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars.size())
        return "constraint " + std::to_string(i) + " references unknown variable";
      if (!std::isfinite(t.coef)) return "constraint " + std::to_string(i) + " has a non-finite coefficient";
    }
  }
  return {};
}

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolverOptions& options) {
  if (auto err = validate(lp, options); !err.empty()) {
    LpSolution sol;
    sol.status = Status::Invalid;
    sol.message = err;
    return sol;
  }
  for (const auto& v : lp.variables()) {
    if (v.upper && *v.upper < v.lower - options.feasibility_tolerance) {
      LpSolution sol;
      sol.status = Status::Infeasible;
      sol.message = "variable '" + v.name + "' has upper bound below lower bound";
      return sol;
    }
  }
  auto sol = Tableau(lp, options).run();
  if (sol.optimal() && sol.max_violation > kAcceptedViolation) {
    auto retry = options;
    retry.rule = options.rule == PivotRule::Bland ? PivotRule::DantzigBland : PivotRule::Bland;
    auto second = Tableau(lp, retry).run();
    if (second.optimal() && second.max_violation <= kAcceptedViolation) return second;
    sol.status = Status::Numerical;
    sol.message = "solution violates constraints by " + std::to_string(sol.max_violation);
  }
  return sol;
}

}  // namespace hdrelay::lp
