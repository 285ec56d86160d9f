#include "hdrelay/regions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace hdrelay {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::IA: return "ia";
    case Scheme::CB: return "cb";
    case Scheme::SC: return "sc";
    case Scheme::DPC: return "dpc";
  }
  return "?";
}

Scheme parse_scheme(const std::string& text) {
  if (text == "ia") return Scheme::IA;
  if (text == "cb") return Scheme::CB;
  if (text == "sc") return Scheme::SC;
  if (text == "dpc") return Scheme::DPC;
  throw ValidationError("unknown scheme '" + text + "' (expected ia, cb, sc or dpc)");
}

int ConstraintSet::find_link(NodeId from, NodeId to) const {
  for (std::size_t l = 0; l < links.size(); ++l)
    if (links[l].from == from && links[l].to == to) return static_cast<int>(l);
  return -1;
}

int ConstraintSet::find_var(RateVar::Kind kind, NodeId tx, NodeId rx) const {
  for (std::size_t v = 0; v < vars.size(); ++v) {
    const auto& rv = vars[v];
    if (rv.kind == kind && rv.tx == tx && (kind == RateVar::Kind::TxTotal || rv.rx == rx)) return static_cast<int>(v);
  }
  return -1;
}

namespace {

double sq(double x) { return x * x; }

void check_degree(std::size_t n, NodeId j) {
  if (n > static_cast<std::size_t>(kMaxSubsetDegree))
    throw ValidationError("receiver " + std::to_string(j.value) + " has " + std::to_string(n) +
                          " interfering signals; subset constraints are limited to " +
                          std::to_string(kMaxSubsetDegree));
}

// Common-broadcast rows at receiver j over the transmitters in `senders`.
void add_mac_rows(const Network& net, ConstraintSet& cs, NodeId j, const std::vector<NodeId>& senders,
                  double extra_noise) {
  check_degree(senders.size(), j);
  std::vector<int> var_of(senders.size());
  for (std::size_t b = 0; b < senders.size(); ++b) var_of[b] = cs.find_var(RateVar::Kind::TxTotal, senders[b]);
  const double snr = net.snr();
  const std::uint32_t count = 1u << senders.size();
  cs.rows.reserve(cs.rows.size() + count - 1);
  for (std::uint32_t mask = 1; mask < count; ++mask) {
    RegionRow row;
    row.vars.reserve(static_cast<std::size_t>(std::popcount(mask)));
    double power = 0.0;
    for (std::size_t b = 0; b < senders.size(); ++b) {
      if (!((mask >> b) & 1u)) continue;
      row.vars.push_back(var_of[b]);
      power += sq(net.gain(senders[b], j));
    }
    row.rhs = awgn_capacity(snr * power / (1.0 + extra_noise));
    row.kind = RegionRow::Kind::Mac;
    row.at = j;
    cs.rows.push_back(std::move(row));
  }
}

}  // namespace

ConstraintSet cb_region(const Network& net, const State& s) {
  const StateView v(net, s);
  ConstraintSet cs;
  cs.scheme = Scheme::CB;
  cs.state = s;
  for (auto i : s.tx.members()) {
    const auto& rs = v.receivers(i);
    if (rs.empty()) continue;
    cs.vars.push_back({RateVar::Kind::TxTotal, i, {}});
    for (auto j : s.rx.members())
      if (net.connected(i, j)) cs.links.push_back({i, j});
  }
  for (auto j : s.rx.members()) {
    const auto& senders = v.transmitters(j);
    if (!senders.empty()) add_mac_rows(net, cs, j, senders, 0.0);
  }
  return cs;
}

ConstraintSet ia_region(const Network& net, const State& s) {
  if (s.tx.size() != 1) throw ValidationError("interference avoidance needs a single transmitter, got " + to_string(s));
  auto cs = cb_region(net, s);
  cs.scheme = Scheme::IA;
  return cs;
}

PowerSplit PowerSplit::strongest(const StateView& v) {
  PowerSplit p;
  for (auto i : v.state().tx.members()) {
    const auto& rs = v.receivers(i);
    for (std::size_t l = 0; l < rs.size(); ++l) p.set(i, rs[l], l == 0 ? 1.0 : 0.0);
  }
  return p;
}

PowerSplit PowerSplit::weakest(const StateView& v) {
  PowerSplit p;
  for (auto i : v.state().tx.members()) {
    const auto& rs = v.receivers(i);
    for (std::size_t l = 0; l < rs.size(); ++l) p.set(i, rs[l], l + 1 == rs.size() ? 1.0 : 0.0);
  }
  return p;
}

PowerSplit PowerSplit::equal(const StateView& v) {
  PowerSplit p;
  for (auto i : v.state().tx.members()) {
    const auto& rs = v.receivers(i);
    for (auto j : rs) p.set(i, j, 1.0 / static_cast<double>(rs.size()));
  }
  return p;
}

double PowerSplit::alpha(NodeId i, NodeId j) const {
  auto it = alpha_.find({i.value, j.value});
  return it == alpha_.end() ? 0.0 : it->second;
}

void PowerSplit::validate(const StateView& v) const {
  for (auto i : v.state().tx.members()) {
    double total = 0.0;
    for (auto j : v.receivers(i)) {
      const double a = alpha(i, j);
      if (!(a >= 0.0 && a <= 1.0))
        throw ValidationError("power share " + std::to_string(i.value) + "->" + std::to_string(j.value) +
                              " must lie in [0, 1]");
      total += a;
    }
    if (total > 1.0 + 1e-12)
      throw ValidationError("power shares of transmitter " + std::to_string(i.value) + " exceed 1");
  }
}

ConstraintSet sc_region(const Network& net, const State& s, const PowerSplit& split) {
  const StateView v(net, s);
  split.validate(v);
  ConstraintSet cs;
  cs.scheme = Scheme::SC;
  cs.state = s;
  const double snr = net.snr();
  auto share = [&](NodeId i, NodeId j) {
    if (v.degree(i) == 1 && !split.entries().contains({i.value, j.value})) return 1.0;
    return split.alpha(i, j);
  };

  for (auto i : s.tx.members()) {
    for (auto j : v.receivers(i)) {
      cs.links.push_back({i, j});
      cs.vars.push_back({RateVar::Kind::Link, i, j});
    }
  }
  // Own-link caps: codewords of stronger receivers are noise.
  for (auto i : s.tx.members()) {
    const auto& rs = v.receivers(i);
    for (std::size_t l = 0; l < rs.size(); ++l) {
      const NodeId j = rs[l];
      const double h2 = sq(net.gain(i, j));
      double interference = 0.0;
      for (std::size_t p = 0; p < l; ++p) interference += h2 * share(i, rs[p]) * snr;
      RegionRow row;
      row.vars.push_back(cs.find_var(RateVar::Kind::Link, i, j));
      row.rhs = awgn_capacity(h2 * share(i, j) * snr / (1.0 + interference));
      row.kind = RegionRow::Kind::Link;
      row.at = j;
      cs.rows.push_back(std::move(row));
    }
  }
  // Joint decoding at each receiver of its own and all weaker codewords of every sender.
  for (auto j : s.rx.members()) {
    const auto& senders = v.transmitters(j);
    if (senders.empty()) continue;
    std::vector<std::pair<NodeId, NodeId>> q;
    std::vector<double> power;
    double interference = 0.0;
    for (auto p : senders) {
      const auto& rs = v.receivers(p);
      const auto rank = static_cast<std::size_t>(v.rank(p, j));
      const double h2 = sq(net.gain(p, j));
      for (std::size_t l = 0; l < rs.size(); ++l) {
        if (l + 1 < rank) {
          interference += h2 * share(p, rs[l]) * snr;
        } else {
          q.emplace_back(p, rs[l]);
          power.push_back(h2 * share(p, rs[l]) * snr);
        }
      }
    }
    check_degree(q.size(), j);
    std::vector<int> q_var;
    for (const auto& [p, r] : q) q_var.push_back(cs.find_var(RateVar::Kind::Link, p, r));
    const std::uint32_t count = 1u << q.size();
    cs.rows.reserve(cs.rows.size() + count - 1);
    for (std::uint32_t mask = 1; mask < count; ++mask) {
      RegionRow row;
      row.vars.reserve(static_cast<std::size_t>(std::popcount(mask)));
      double sig = 0.0;
      for (std::size_t b = 0; b < q.size(); ++b) {
        if (!((mask >> b) & 1u)) continue;
        row.vars.push_back(q_var[b]);
        sig += power[b];
      }
      row.rhs = awgn_capacity(sig / (1.0 + interference));
      row.kind = RegionRow::Kind::Sic;
      row.at = j;
      cs.rows.push_back(std::move(row));
    }
  }
  return cs;
}

std::vector<NodeId> dpc_receivers(const Network& net, const State& s, DpcInterference mode) {
  std::vector<NodeId> out;
  if (!s.tx.contains(net.source())) return out;
  const NodeSet heard = net.neighbors(net.source()) & s.rx;
  if (mode == DpcInterference::Reject && heard.size() != 1) return out;
  return heard.members();
}

ConstraintSet dpc_region(const Network& net, const State& s, NodeId r, DpcInterference mode) {
  const NodeId src = net.source();
  if (!s.tx.contains(src)) throw ValidationError("dirty-paper coding needs the source to transmit in " + to_string(s));
  if (!s.rx.contains(r) || !net.connected(src, r))
    throw ValidationError("node " + std::to_string(r.value) + " is not a receiver of the source in " + to_string(s));
  const NodeSet others = (net.neighbors(src) & s.rx) - NodeSet{r.value};
  if (mode == DpcInterference::Reject && !others.empty())
    throw ValidationError("source also reaches receiver " + std::to_string(others.members()[0].value) + " in " +
                          to_string(s) + "; use the noise treatment to allow it");

  const StateView v(net, s);
  ConstraintSet cs;
  cs.scheme = Scheme::DPC;
  cs.state = s;
  cs.dpc_receiver = r;
  cs.links.push_back({src, r});
  cs.vars.push_back({RateVar::Kind::SourceDpc, src, r});
  cs.rows.push_back({{0}, awgn_capacity(net.snr() * sq(net.gain(src, r))), RegionRow::Kind::Dpc, r});
  for (auto i : s.tx.members()) {
    if (i == src) continue;
    bool any = false;
    for (auto j : v.receivers(i)) {
      if (j == r) continue;
      if (!any) cs.vars.push_back({RateVar::Kind::TxTotal, i, {}});
      any = true;
      cs.links.push_back({i, j});
    }
  }
  std::sort(cs.links.begin() + 1, cs.links.end(),
            [](const Link& a, const Link& b) { return std::pair(a.from, a.to) < std::pair(b.from, b.to); });
  for (auto j : s.rx.members()) {
    if (j == r) continue;
    std::vector<NodeId> senders;
    for (auto i : v.transmitters(j))
      if (i != src) senders.push_back(i);
    if (senders.empty()) continue;
    const double extra = net.connected(src, j) ? net.snr() * sq(net.gain(src, j)) : 0.0;
    add_mac_rows(net, cs, j, senders, extra);
  }
  return cs;
}

std::string row_label(const ConstraintSet& cs, const RegionRow& row) {
  auto var_text = [&](int k) {
    const auto& v = cs.vars[static_cast<std::size_t>(k)];
    if (v.kind == RateVar::Kind::TxTotal) return std::to_string(v.tx.value);
    return std::to_string(v.tx.value) + ">" + std::to_string(v.rx.value);
  };
  auto list = [&](const char* sep) {
    std::string out = "{";
    for (std::size_t k = 0; k < row.vars.size(); ++k) out += (k ? sep : "") + var_text(row.vars[k]);
    return out + "}";
  };
  const auto at = std::to_string(row.at.value);
  switch (row.kind) {
    case RegionRow::Kind::Mac: return "mac@" + at + list(",");
    case RegionRow::Kind::Sic: return "sic@" + at + list(" ");
    case RegionRow::Kind::Link:
    case RegionRow::Kind::Dpc: {
      const auto& v = cs.vars[static_cast<std::size_t>(row.vars.front())];
      return std::string(row.kind == RegionRow::Kind::Link ? "link" : "dpc") + std::to_string(v.tx.value) + "->" +
             std::to_string(v.rx.value);
    }
  }
  return {};
}

std::string var_name(const RateVar& v) {
  switch (v.kind) {
    case RateVar::Kind::TxTotal: return "R" + std::to_string(v.tx.value);
    case RateVar::Kind::Link: return "R" + std::to_string(v.tx.value) + ">" + std::to_string(v.rx.value);
    case RateVar::Kind::SourceDpc: return "Rs" + std::to_string(v.tx.value) + ">" + std::to_string(v.rx.value);
  }
  return "?";
}

void write_region_csv(std::ostream& out, const ConstraintSet& cs, bool header) {
  if (header) out << "state,row,variables,coefficients,rhs\n";
  char rhs[32];
  for (const auto& row : cs.rows) {
    std::string vars, coefs;
    for (std::size_t k = 0; k < row.vars.size(); ++k) {
      vars += (k ? " " : "") + var_name(cs.vars[static_cast<std::size_t>(row.vars[k])]);
      coefs += k ? " 1" : "1";
    }
    std::snprintf(rhs, sizeof rhs, "%.9g", row.rhs);
    out << '"' << to_string(cs.state) << "\",\"" << row_label(cs, row) << "\"," << vars << ',' << coefs << ',' << rhs
        << '\n';
  }
}

std::vector<double> row_values(const ConstraintSet& cs, const std::vector<double>& rates) {
  std::vector<double> out;
  out.reserve(cs.rows.size());
  for (const auto& row : cs.rows) {
    double v = 0.0;
    for (int k : row.vars) v += rates[static_cast<std::size_t>(k)];
    out.push_back(v);
  }
  return out;
}

}  // namespace hdrelay
