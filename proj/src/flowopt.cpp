#include "hdrelay/flowopt.hpp"

#include <algorithm>
#include <cmath>

#include "flow_program.hpp"

namespace hdrelay {

std::vector<std::size_t> SchemeSolution::active(double tol) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k].lambda > tol) out.push_back(k);
  return out;
}

std::vector<ConstraintSet> scheme_blocks(const Network& net, const std::vector<State>& states, Scheme scheme,
                                         const FlowOptions& opt) {
  std::vector<ConstraintSet> out;
  for (const auto& s : states) {
    validate_state(net, s);
    switch (scheme) {
      case Scheme::IA:
        if (s.tx.size() == 1) out.push_back(ia_region(net, s));
        break;
      case Scheme::CB:
        out.push_back(cb_region(net, s));
        break;
      case Scheme::SC:
        out.push_back(sc_region(net, s, PowerSplit::equal(StateView(net, s))));
        break;
      case Scheme::DPC: {
        auto rs = dpc_receivers(net, s, opt.dpc);
        if (rs.empty()) {
          out.push_back(cb_region(net, s));
          out.back().scheme = Scheme::DPC;
        }
        for (auto r : rs) out.push_back(dpc_region(net, s, r, opt.dpc));
        break;
      }
    }
  }
  return out;
}

namespace detail {

lp::LinearProgram build_flow_program(const Network& net, const std::vector<const ConstraintSet*>& blocks,
                                     FlowLayout& layout, bool named) {
  lp::LinearProgram prog;
  auto name = [named](auto&&... parts) { return named ? (std::string{} + ... + parts) : std::string{}; };
  layout = FlowLayout{};
  layout.rate = prog.add_variable("R", 1.0);
  const auto m = static_cast<std::size_t>(net.node_count());
  std::vector<std::vector<lp::Term>> conservation(m);
  conservation[net.source().index()].push_back({layout.rate, -1.0});
  conservation[net.sink().index()].push_back({layout.rate, 1.0});

  std::vector<lp::Term> share;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& cs = *blocks[k];
    const auto tag = named ? "s" + std::to_string(k) : std::string{};
    const int lam = prog.add_variable(name("lambda_", tag));
    layout.lambda.push_back(lam);
    share.push_back({lam, 1.0});
    auto& lv = layout.link_var.emplace_back();
    for (const auto& l : cs.links) {
      const int f = prog.add_variable(name("f_", tag, "_", std::to_string(l.from.value), "_", std::to_string(l.to.value)));
      lv.push_back(f);
      conservation[l.from.index()].push_back({f, 1.0});
      conservation[l.to.index()].push_back({f, -1.0});
    }
    // Each rate variable maps to a column: its link flow, or an explicit total.
    std::vector<int> column(cs.vars.size());
    auto& tv = layout.total_var.emplace_back(cs.vars.size(), -1);
    for (std::size_t v = 0; v < cs.vars.size(); ++v) {
      const auto& rv = cs.vars[v];
      if (rv.kind == RateVar::Kind::TxTotal) {
        const int x = prog.add_variable(name("x_", tag, "_", std::to_string(rv.tx.value)));
        tv[v] = x;
        column[v] = x;
        std::vector<lp::Term> terms;
        for (std::size_t l = 0; l < cs.links.size(); ++l)
          if (cs.links[l].from == rv.tx) terms.push_back({lv[l], 1.0});
        terms.push_back({x, -1.0});
        prog.add_constraint(name("total_", tag, "_", std::to_string(rv.tx.value)), std::move(terms),
                            lp::Relation::LessEqual, 0.0);
      } else {
        column[v] = lv[static_cast<std::size_t>(cs.find_link(rv.tx, rv.rx))];
      }
    }
    for (const auto& row : cs.rows) {
      std::vector<lp::Term> terms;
      for (int v : row.vars) terms.push_back({column[static_cast<std::size_t>(v)], 1.0});
      if (row.rhs != 0.0) terms.push_back({lam, -row.rhs});
      prog.add_constraint(named ? tag + "_" + row_label(cs, row) : std::string{}, std::move(terms), lp::Relation::LessEqual, 0.0);
    }
  }
  for (std::size_t n = 0; n < m; ++n)
    layout.conservation_row.push_back(prog.add_constraint(name("flow", std::to_string(n + 1)), std::move(conservation[n]),
                                                          lp::Relation::Equal, 0.0));
  layout.share_row = prog.add_constraint(name("share"), std::move(share), lp::Relation::LessEqual, 1.0);
  return prog;
}

BlockSolution extract_block(const ConstraintSet& cs, const FlowLayout& layout, std::size_t k,
                            const std::vector<double>& x) {
  BlockSolution b;
  b.region = cs;
  b.lambda = x[static_cast<std::size_t>(layout.lambda[k])];
  for (int f : layout.link_var[k]) b.link_flow.push_back(x[static_cast<std::size_t>(f)]);
  for (std::size_t v = 0; v < cs.vars.size(); ++v) {
    const int t = layout.total_var[k][v];
    if (t >= 0) {
      b.rates.push_back(x[static_cast<std::size_t>(t)]);
    } else {
      const auto& rv = cs.vars[v];
      b.rates.push_back(b.link_flow[static_cast<std::size_t>(cs.find_link(rv.tx, rv.rx))]);
    }
  }
  return b;
}

BlockSolution idle_block(const ConstraintSet& cs) {
  BlockSolution b;
  b.region = cs;
  b.link_flow.assign(cs.links.size(), 0.0);
  b.rates.assign(cs.vars.size(), 0.0);
  return b;
}

}  // namespace detail

lp::LinearProgram build_flow_program(const Network& net, const std::vector<ConstraintSet>& blocks,
                                     FlowLayout& layout) {
  std::vector<const ConstraintSet*> ptrs;
  for (const auto& b : blocks) ptrs.push_back(&b);
  return detail::build_flow_program(net, ptrs, layout);
}

SchemeSolution solve_blocks(const Network& net, std::vector<ConstraintSet> blocks, Scheme scheme,
                            const lp::SolverOptions& lp_options) {
  SchemeSolution sol;
  sol.scheme = scheme;
  FlowLayout layout;
  auto prog = build_flow_program(net, blocks, layout);
  auto res = lp::solve(prog, lp_options);
  sol.status = res.status;
  if (!res.optimal())
    throw SolverError(std::string(to_string(scheme)) + " flow program: " + lp::to_string(res.status) + " " + res.message);
  sol.rate = res.primal[static_cast<std::size_t>(layout.rate)];
  for (std::size_t k = 0; k < blocks.size(); ++k)
    sol.blocks.push_back(detail::extract_block(blocks[k], layout, k, res.primal));
  return sol;
}

SchemeSolution solve_linear_scheme(const Network& net, const std::vector<State>& states, Scheme scheme,
                                   const FlowOptions& opt) {
  if (scheme == Scheme::SC) throw ValidationError("superposition coding is not a linear scheme");
  if (states.empty()) throw ValidationError("no states to schedule");
  return solve_blocks(net, scheme_blocks(net, states, scheme, opt), scheme, opt.lp);
}

SchemeSolution solve_dpc(const Network& net, const std::vector<State>& states, const FlowOptions& opt) {
  return solve_linear_scheme(net, states, Scheme::DPC, opt);
}

SchemeSolution solve_scheme(const Network& net, const std::vector<State>& states, Scheme scheme,
                            const FlowOptions& opt, const ScSearchConfig& sc) {
  if (scheme == Scheme::SC) return solve_sc(net, states, sc);
  return solve_linear_scheme(net, states, scheme, opt);
}

Certificate check_certificate(const Network& net, const SchemeSolution& sol) {
  Certificate c;
  std::vector<double> net_out(static_cast<std::size_t>(net.node_count()), 0.0);
  double share = 0.0;
  for (const auto& b : sol.blocks) {
    share += b.lambda;
    c.negativity = std::max(c.negativity, -b.lambda);
    for (std::size_t l = 0; l < b.region.links.size(); ++l) {
      const double f = b.link_flow[l];
      c.negativity = std::max(c.negativity, -f);
      net_out[b.region.links[l].from.index()] += f;
      net_out[b.region.links[l].to.index()] -= f;
    }
    for (std::size_t v = 0; v < b.region.vars.size(); ++v) {
      const auto& rv = b.region.vars[v];
      c.negativity = std::max(c.negativity, -b.rates[v]);
      if (rv.kind == RateVar::Kind::TxTotal) {
        double out = 0.0;
        for (std::size_t l = 0; l < b.region.links.size(); ++l)
          if (b.region.links[l].from == rv.tx) out += b.link_flow[l];
        c.region_violation = std::max(c.region_violation, out - b.rates[v]);
      } else {
        const double f = b.link_flow[static_cast<std::size_t>(b.region.find_link(rv.tx, rv.rx))];
        c.region_violation = std::max(c.region_violation, std::abs(f - b.rates[v]));
      }
    }
    auto lhs = row_values(b.region, b.rates);
    for (std::size_t r = 0; r < lhs.size(); ++r)
      c.region_violation = std::max(c.region_violation, lhs[r] - b.lambda * b.region.rows[r].rhs);
  }
  for (int n = 1; n <= net.node_count(); ++n) {
    double expect = 0.0;
    if (NodeId{n} == net.source()) expect = sol.rate;
    if (NodeId{n} == net.sink()) expect = -sol.rate;
    c.flow_residual = std::max(c.flow_residual, std::abs(net_out[static_cast<std::size_t>(n - 1)] - expect));
  }
  c.share_excess = std::max(0.0, share - 1.0);
  return c;
}

}  // namespace hdrelay
