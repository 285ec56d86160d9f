#include "hdrelay/cutset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <Eigen/Dense>

namespace hdrelay {

std::vector<Cut> enumerate_cuts(const Network& net) {
  const int m = net.node_count();
  if (m > 22) throw ValidationError("cut enumeration is limited to 22 nodes");
  std::vector<NodeId> relays;
  for (int n = 1; n <= m; ++n)
    if (NodeId{n} != net.source() && NodeId{n} != net.sink()) relays.push_back(NodeId{n});
  std::vector<Cut> cuts;
  const std::uint32_t count = 1u << relays.size();
  cuts.reserve(count);
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    Cut c;
    c.omega.insert(net.source());
    for (std::size_t r = 0; r < relays.size(); ++r)
      if ((mask >> r) & 1u) c.omega.insert(relays[r]);
    cuts.push_back(c);
  }
  return cuts;
}

const char* to_string(CutTag tag) {
  switch (tag) {
    case CutTag::Empty: return "empty";
    case CutTag::PointToPoint: return "point-to-point";
    case CutTag::Mac: return "mac";
    case CutTag::Broadcast: return "broadcast";
    case CutTag::Mimo: return "mimo";
  }
  return "?";
}

namespace {

using Matrix = Eigen::MatrixXd;

double half_log2_det(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  const Matrix l = llt.matrixL();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log2(l(i, i));
  return s;  // log2 det = 2 sum log2 L_ii, times 1/2
}

double coop_objective(const Matrix& h, const Matrix& l, double snr) {
  const Matrix q = l * l.transpose();
  const Matrix m = Matrix::Identity(h.rows(), h.rows()) + snr * h * q * h.transpose();
  return half_log2_det(m);
}

void project_rows(Matrix& l) {
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double n = l.row(i).norm();
    if (n > 1.0) l.row(i) /= n;
  }
}

}  // namespace

double cooperative_mimo_capacity(const std::vector<double>& hv, int rows, int cols, double snr) {
  Matrix h(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) h(r, c) = hv[static_cast<std::size_t>(r * cols + c)];
  // Q = L L^T with unit-capped rows of L keeps every diagonal entry of Q at most 1.
  Matrix l = Matrix::Identity(cols, cols);
  double f = coop_objective(h, l, snr);
  double step = 1.0;
  for (int it = 0; it < 5000 && step > 1e-12; ++it) {
    const Matrix q = l * l.transpose();
    const Matrix m = Matrix::Identity(rows, rows) + snr * h * q * h.transpose();
    const Matrix g = snr * h.transpose() * m.ldlt().solve(h);
    const Matrix grad = 2.0 * g * l;
    for (;;) {
      Matrix trial = l + step * grad;
      project_rows(trial);
      const double ft = coop_objective(h, trial, snr);
      if (ft > f) {
        const double gain = ft - f;
        l = trial;
        f = ft;
        step *= 2.0;
        if (gain < 1e-9) step = 0.0;
        break;
      }
      step *= 0.5;
      if (step <= 1e-12) break;
    }
  }
  return f;
}

CutEntry cut_capacity(const Network& net, const Cut& cut, const State& s, const CutOptions& opt) {
  NodeSet t = s.tx & cut.omega;
  NodeSet rv = s.rx - cut.omega;
  // Keep only nodes with an edge across the cut.
  NodeSet t2{}, r2{};
  for (auto i : t.members())
    if (!(net.neighbors(i) & rv).empty()) t2.insert(i);
  for (auto j : rv.members())
    if (!(net.neighbors(j) & t2).empty()) r2.insert(j);
  if (t2.empty() || r2.empty()) return {0.0, CutTag::Empty};

  const double snr = net.snr();
  const auto tx = t2.members(), rx = r2.members();
  auto sq = [&](NodeId i, NodeId j) {
    const double g = net.gain(i, j);
    return g * g;
  };
  if (tx.size() == 1 && rx.size() == 1) return {awgn_capacity(snr * sq(tx[0], rx[0])), CutTag::PointToPoint};
  if (rx.size() == 1) {
    double sum = 0.0;
    for (auto i : tx) sum += sq(i, rx[0]);
    return {awgn_capacity(snr * sum), CutTag::Mac};
  }
  if (tx.size() == 1) {
    double best = 0.0, sum = 0.0;
    for (auto j : rx) {
      best = std::max(best, sq(tx[0], j));
      sum += sq(tx[0], j);
    }
    return {awgn_capacity(snr * (opt.broadcast == BroadcastRule::BestUser ? best : sum)), CutTag::Broadcast};
  }
  const int rows = static_cast<int>(rx.size()), cols = static_cast<int>(tx.size());
  if (opt.mimo == MimoRule::Cooperative) {
    std::vector<double> h;
    for (auto j : rx)
      for (auto i : tx) h.push_back(net.gain(i, j));
    return {cooperative_mimo_capacity(h, rows, cols, snr), CutTag::Mimo};
  }
  Matrix h(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) h(r, c) = net.gain(tx[static_cast<std::size_t>(c)], rx[static_cast<std::size_t>(r)]);
  const Matrix m = Matrix::Identity(rows, rows) + snr * h * h.transpose();
  return {half_log2_det(m), CutTag::Mimo};
}

CutCapacityTable capacity_table(const Network& net, const std::vector<State>& states, const CutOptions& opt) {
  CutCapacityTable t;
  t.cuts = enumerate_cuts(net);
  t.states = states;
  t.entries.assign(t.cuts.size(), std::vector<CutEntry>(states.size()));
  for (std::size_t c = 0; c < t.cuts.size(); ++c)
    for (std::size_t k = 0; k < states.size(); ++k) t.entries[c][k] = cut_capacity(net, t.cuts[c], states[k], opt);
  return t;
}

BoundResult cutset_bound(const Network& net, const std::vector<State>& states, const CutOptions& opt,
                         const lp::SolverOptions& lp_options) {
  if (states.empty()) throw ValidationError("the bound needs at least one state");
  BoundResult res;
  res.table = capacity_table(net, states, opt);
  const auto& e = res.table.entries;
  const std::size_t ncut = e.size();

  // States with identical cut profiles are interchangeable; keep the first.
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<std::size_t> columns;
  for (std::size_t k = 0; k < states.size(); ++k) {
    std::vector<double> profile(ncut);
    bool nonzero = false;
    for (std::size_t c = 0; c < ncut; ++c) {
      profile[c] = e[c][k].value;
      nonzero = nonzero || profile[c] > 0.0;
    }
    if (!nonzero && !columns.empty()) continue;
    if (seen.emplace(std::move(profile), k).second) columns.push_back(k);
  }

  lp::LinearProgram prog;
  const int r = prog.add_variable("R", 1.0);
  std::vector<int> lam;
  for (auto k : columns) lam.push_back(prog.add_variable("lambda" + std::to_string(k)));
  for (std::size_t c = 0; c < ncut; ++c) {
    std::vector<lp::Term> terms{{r, 1.0}};
    for (std::size_t q = 0; q < columns.size(); ++q) {
      const double v = e[c][columns[q]].value;
      if (v != 0.0) terms.push_back({lam[q], -v});
    }
    prog.add_constraint("cut" + std::to_string(c), std::move(terms), lp::Relation::LessEqual, 0.0);
  }
  std::vector<lp::Term> share;
  for (int v : lam) share.push_back({v, 1.0});
  prog.add_constraint("share", std::move(share), lp::Relation::Equal, 1.0);

  auto sol = lp::solve(prog, lp_options);
  res.status = sol.status;
  if (!sol.optimal()) throw SolverError("cut-set program: " + std::string(lp::to_string(sol.status)) + " " + sol.message);
  res.rate = sol.primal[static_cast<std::size_t>(r)];
  res.lambda.assign(states.size(), 0.0);
  for (std::size_t q = 0; q < columns.size(); ++q) res.lambda[columns[q]] = sol.primal[static_cast<std::size_t>(lam[q])];
  res.cut_values.assign(ncut, 0.0);
  res.binding.assign(ncut, false);
  for (std::size_t c = 0; c < ncut; ++c) {
    double v = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) v += res.lambda[k] * e[c][k].value;
    res.cut_values[c] = v;
    res.binding[c] = v - res.rate <= 1e-9;
  }
  return res;
}

void write_capacity_table_csv(std::ostream& out, const CutCapacityTable& table) {
  out << "cut,state,class,capacity\n";
  char value[32];
  for (std::size_t c = 0; c < table.cuts.size(); ++c) {
    for (std::size_t k = 0; k < table.states.size(); ++k) {
      const auto& e = table.entries[c][k];
      std::snprintf(value, sizeof value, "%.9g", e.value);
      out << '"' << to_string(table.cuts[c].omega) << "\",\"" << to_string(table.states[k]) << "\"," << to_string(e.tag)
          << ',' << value << '\n';
    }
  }
}

}  // namespace hdrelay
