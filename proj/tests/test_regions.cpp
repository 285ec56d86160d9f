#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hdrelay/error.hpp"
#include "hdrelay/regions.hpp"
#include "support/oracle.hpp"
#include "support/random_networks.hpp"

using namespace hdrelay;

namespace {

State st(std::initializer_list<int> tx, std::initializer_list<int> rx) { return {NodeSet(tx), NodeSet(rx)}; }

using LinkSet = std::set<std::pair<int, int>>;

/// Tightest right-hand side per set of links, with every rate variable expanded to the links it covers.
std::map<LinkSet, double> flatten(const ConstraintSet& cs) {
  std::map<LinkSet, double> out;
  for (const auto& row : cs.rows) {
    LinkSet links;
    for (int k : row.vars) {
      const auto& v = cs.vars[static_cast<std::size_t>(k)];
      if (v.kind == RateVar::Kind::TxTotal) {
        for (const auto& l : cs.links)
          if (l.from == v.tx) links.insert({l.from.value, l.to.value});
      } else {
        links.insert({v.tx.value, v.rx.value});
      }
    }
    auto [it, fresh] = out.emplace(links, row.rhs);
    if (!fresh) it->second = std::min(it->second, row.rhs);
  }
  return out;
}

std::map<LinkSet, double> flatten(const oracle::Region& reg) {
  std::map<LinkSet, double> out;
  for (const auto& cap : reg.caps) {
    LinkSet links(cap.links.begin(), cap.links.end());
    if (links.empty()) continue;
    auto [it, fresh] = out.emplace(links, cap.rhs);
    if (!fresh) it->second = std::min(it->second, cap.rhs);
  }
  return out;
}

void check_same(const std::map<LinkSet, double>& got, const std::map<LinkSet, double>& want) {
  REQUIRE(got.size() == want.size());
  for (const auto& [links, rhs] : want) {
    const auto it = got.find(links);
    REQUIRE(it != got.end());
    CHECK(it->second == doctest::Approx(rhs).epsilon(1e-12));
  }
}

const RegionRow& row_of(const ConstraintSet& cs, RegionRow::Kind kind, const std::vector<int>& vars) {
  for (const auto& row : cs.rows) {
    auto sorted = row.vars;
    std::sort(sorted.begin(), sorted.end());
    if (row.kind == kind && sorted == vars) return row;
  }
  throw std::runtime_error("row not found");
}

std::map<std::pair<int, int>, double> to_map(const PowerSplit& split) { return split.entries(); }

PowerSplit random_split(std::mt19937_64& rng, const StateView& v) {
  PowerSplit split;
  for (auto i : v.state().tx.members()) {
    const auto& rs = v.receivers(i);
    std::vector<double> w;
    double total = 0.0;
    for (std::size_t k = 0; k < rs.size(); ++k) {
      w.push_back(-std::log(1.0 - testing::unit(rng)));
      total += w.back();
    }
    for (std::size_t k = 0; k < rs.size(); ++k) split.set(i, rs[k], w[k] / total);
  }
  return split;
}

}  // namespace

TEST_CASE("common broadcast examples") {
  const auto diamond = load_network("diamond");
  const auto mac = cb_region(diamond, st({2, 3}, {4}));
  REQUIRE(mac.rows.size() == 3);
  std::vector<double> rhs;
  for (const auto& r : mac.rows) rhs.push_back(r.rhs);
  std::sort(rhs.begin(), rhs.end());
  CHECK(rhs[0] == doctest::Approx(1.0));
  CHECK(rhs[1] == doctest::Approx(1.0));
  CHECK(rhs[2] == doctest::Approx(1.4037).epsilon(1e-4));

  const auto p2p = cb_region(load_network("twonode"), st({1}, {2}));
  REQUIRE(p2p.rows.size() == 1);
  CHECK(p2p.rows[0].rhs == doctest::Approx(1.0));
  CHECK(ia_region(load_network("twonode"), st({1}, {2})).rows.size() == 1);
  CHECK_THROWS_AS(ia_region(diamond, st({2, 3}, {4})), ValidationError);

  const auto cut = load_network("twostage").with_class("beta", 0.0);
  const auto pruned = cb_region(cut, st({2}, {3, 4, 5}));
  REQUIRE(pruned.links.size() == 1);
  CHECK(pruned.links[0] == Link{NodeId{2}, NodeId{5}});
}

TEST_CASE("superposition examples") {
  const auto net = load_network("diamond");
  const State s = st({1}, {2, 3});
  const StateView v(net, s);
  REQUIRE(v.receivers(NodeId{1}) == std::vector<NodeId>{NodeId{2}, NodeId{3}});

  PowerSplit half;
  half.set(NodeId{1}, NodeId{2}, 0.5);
  half.set(NodeId{1}, NodeId{3}, 0.5);
  const auto cs = sc_region(net, s, half);
  const int r2 = cs.find_var(RateVar::Kind::Link, NodeId{1}, NodeId{2});
  const int r3 = cs.find_var(RateVar::Kind::Link, NodeId{1}, NodeId{3});
  CHECK(row_of(cs, RegionRow::Kind::Link, {r2}).rhs == doctest::Approx(0.6610).epsilon(1e-4));
  CHECK(row_of(cs, RegionRow::Kind::Link, {r3}).rhs == doctest::Approx(0.3390).epsilon(1e-4));
  CHECK(row_of(cs, RegionRow::Kind::Sic, {std::min(r2, r3), std::max(r2, r3)}).rhs == doctest::Approx(1.0));

  PowerSplit all_first;
  all_first.set(NodeId{1}, NodeId{2}, 1.0);
  all_first.set(NodeId{1}, NodeId{3}, 0.0);
  const auto degenerate = sc_region(net, s, all_first);
  const int d2 = degenerate.find_var(RateVar::Kind::Link, NodeId{1}, NodeId{2});
  const int d3 = degenerate.find_var(RateVar::Kind::Link, NodeId{1}, NodeId{3});
  CHECK(row_of(degenerate, RegionRow::Kind::Link, {d2}).rhs == doctest::Approx(1.0));
  CHECK(row_of(degenerate, RegionRow::Kind::Link, {d3}).rhs == 0.0);

  PowerSplit silent;
  silent.set(NodeId{1}, NodeId{2}, 0.0);
  silent.set(NodeId{1}, NodeId{3}, 0.0);
  for (const auto& row : sc_region(net, s, silent).rows) CHECK(row.rhs == 0.0);

  PowerSplit over;
  over.set(NodeId{1}, NodeId{2}, 0.7);
  over.set(NodeId{1}, NodeId{3}, 0.7);
  CHECK_THROWS_AS(over.validate(v), ValidationError);
  CHECK_NOTHROW(PowerSplit::equal(v).validate(v));
  CHECK(PowerSplit::strongest(v).alpha(NodeId{1}, NodeId{2}) == 1.0);
  CHECK(PowerSplit::weakest(v).alpha(NodeId{1}, NodeId{3}) == 1.0);
}

TEST_CASE("dirty-paper examples") {
  const State s1 = st({1, 2, 4}, {3, 5, 6});
  for (double beta : {0.1, 1.0, 10.0})
    for (double gamma : {0.1, 1.0, 4.0}) {
      const auto net = load_network("twostage").with_class("beta", beta).with_class("gamma", gamma);
      REQUIRE(dpc_receivers(net, s1, DpcInterference::Reject) == std::vector<NodeId>{NodeId{3}});
      const auto cs = dpc_region(net, s1, NodeId{3});
      CHECK(cs.rows[0].kind == RegionRow::Kind::Dpc);
      CHECK(cs.rows[0].rhs == doctest::Approx(1.0));
      for (const auto& l : cs.links)
        if (l.from != net.source()) CHECK(l.to != NodeId{3});
    }

  const auto diamond = load_network("diamond");
  const auto alone = dpc_region(diamond, st({1}, {2}), NodeId{2});
  CHECK(alone.rows.size() == 1);
  CHECK(alone.links.size() == 1);
  CHECK(alone.rows[0].rhs == doctest::Approx(1.0));

  CHECK(dpc_receivers(diamond, st({1}, {2, 3}), DpcInterference::Reject).empty());
  CHECK(dpc_receivers(diamond, st({1}, {2, 3}), DpcInterference::Noise).size() == 2);
  CHECK(dpc_receivers(diamond, st({2}, {4}), DpcInterference::Reject).empty());
  CHECK_THROWS_AS(dpc_region(diamond, st({1}, {2, 3}), NodeId{2}), ValidationError);
  CHECK_THROWS_AS(dpc_region(diamond.with_class("first", 0.0), st({1}, {2}), NodeId{2}), ValidationError);

  // With the source heard elsewhere, the noise treatment shrinks that receiver's caps.
  const auto twostage = load_network("twostage");
  const State heard = st({1, 4}, {2, 3});
  CHECK(dpc_receivers(twostage, heard, DpcInterference::Reject).empty());
  const auto noisy = dpc_region(twostage, heard, NodeId{2}, DpcInterference::Noise);
  int at3 = 0;
  for (const auto& row : noisy.rows)
    if (row.kind == RegionRow::Kind::Mac && row.at == NodeId{3}) {
      CHECK(row.rhs == doctest::Approx(0.5 * std::log2(1.0 + 3.0 / 4.0)));
      ++at3;
    }
  CHECK(at3 == 1);
}

TEST_CASE("regions match the reference construction on random networks") {
  std::mt19937_64 rng(23);
  int dpc_checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto net = testing::random_network(rng, 3 + trial % 4, 0.7);
    for (const auto& s : enumerate_states(net, 3, true)) {
      check_same(flatten(cb_region(net, s)), flatten(oracle::cb(net, s)));

      const StateView v(net, s);
      const auto split = trial % 2 ? random_split(rng, v) : PowerSplit::equal(v);
      check_same(flatten(sc_region(net, s, split)), flatten(oracle::sc(net, s, to_map(split))));

      for (auto r : dpc_receivers(net, s, DpcInterference::Reject)) {
        check_same(flatten(dpc_region(net, s, r)), flatten(oracle::dpc(net, s, r.value)));
        ++dpc_checked;
      }
    }
  }
  CHECK(dpc_checked > 0);
}

TEST_CASE("right-hand sides are nonnegative and grow with power") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = testing::random_network(rng, 5, 0.7);
    const auto louder = net.with_power_noise(net.power() * 2.0, net.noise());
    const auto quieter = net.with_power_noise(net.power(), net.noise() * 2.0);
    for (const auto& s : enumerate_states(net, 3, true)) {
      const StateView v(net, s);
      const auto split = random_split(rng, v);
      const auto base = sc_region(net, s, split);
      const auto up = sc_region(louder, s, split);
      const auto down = sc_region(quieter, s, split);
      for (std::size_t k = 0; k < base.rows.size(); ++k) {
        CHECK(base.rows[k].rhs >= 0.0);
        CHECK(up.rows[k].rhs >= base.rows[k].rhs - 1e-12);
        CHECK(down.rows[k].rhs <= base.rows[k].rhs + 1e-12);
      }
      const auto cb = cb_region(net, s);
      const auto cb_up = cb_region(louder, s);
      for (std::size_t k = 0; k < cb.rows.size(); ++k) {
        CHECK(cb.rows[k].rhs >= 0.0);
        CHECK(cb_up.rows[k].rhs >= cb.rows[k].rhs);
      }
    }
  }
}

TEST_CASE("a stronger edge enlarges the common broadcast region") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = testing::random_network(rng, 5, 0.8);
    auto edges = net.edges();
    const auto k = static_cast<std::size_t>(rng() % edges.size());
    edges[k].gain = net.gain(edges[k].u, edges[k].v) * 1.5;
    const Network grown(net.node_count(), net.source(), net.sink(), net.power(), net.noise(), net.classes(), edges);
    for (const auto& s : enumerate_states(net, 3, true)) {
      const auto a = flatten(cb_region(net, s));
      const auto b = flatten(cb_region(grown, s));
      for (const auto& [links, rhs] : a) {
        const auto it = b.find(links);
        REQUIRE(it != b.end());
        CHECK(it->second >= rhs - 1e-12);
      }
    }
  }
}

TEST_CASE("single-receiver superposition equals common broadcast") {
  // Every transmitter of a diamond state reaches exactly one receiver.
  const auto net = load_network("diamond").with_class("second", 0.4);
  for (const auto& s : {st({1, 3}, {2, 4}), st({1, 2}, {3, 4}), st({2, 3}, {4})}) {
    const StateView v(net, s);
    check_same(flatten(sc_region(net, s, PowerSplit::equal(v))), flatten(cb_region(net, s)));
  }
}

TEST_CASE("regions are down-closed") {
  std::mt19937_64 rng(37);
  const auto net = load_network("twostage").with_class("gamma", 0.3);
  for (const auto& s : mdf_states(net)) {
    const StateView v(net, s);
    const auto cs = sc_region(net, s, random_split(rng, v));
    for (int sample = 0; sample < 20; ++sample) {
      std::vector<double> rates(cs.vars.size());
      for (auto& r : rates) r = 1.5 * testing::unit(rng);
      const auto values = row_values(cs, rates);
      bool inside = true;
      for (std::size_t k = 0; k < values.size(); ++k) inside = inside && values[k] <= cs.rows[k].rhs;
      if (!inside) continue;
      for (auto& r : rates) r *= testing::unit(rng);
      const auto smaller = row_values(cs, rates);
      for (std::size_t k = 0; k < smaller.size(); ++k) CHECK(smaller[k] <= cs.rows[k].rhs);
    }
  }
}

TEST_CASE("labels and CSV dump") {
  const auto net = load_network("diamond");
  const auto cs = cb_region(net, st({2, 3}, {4}));
  std::set<std::string> labels;
  for (const auto& row : cs.rows) labels.insert(row_label(cs, row));
  CHECK(labels == std::set<std::string>{"mac@4{2}", "mac@4{3}", "mac@4{2,3}"});
  CHECK(var_name(cs.vars[0]) == "R2");
  CHECK(var_name({RateVar::Kind::Link, NodeId{2}, NodeId{4}}) == "R2>4");
  CHECK(var_name({RateVar::Kind::SourceDpc, NodeId{1}, NodeId{2}}) == "Rs1>2");

  std::ostringstream out;
  write_region_csv(out, cs);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "state,row,variables,coefficients,rhs");
  int rows = 0;
  bool saw_pair = false;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind("\"({2,3},{4})\",", 0) == 0);
    saw_pair = saw_pair || line == "\"({2,3},{4})\",\"mac@4{2,3}\",R2 R3,1 1,1.40367746";
  }
  CHECK(rows == 3);
  CHECK(saw_pair);

  std::ostringstream bare;
  write_region_csv(bare, cs, false);
  CHECK(bare.str().find("state,row") == std::string::npos);
}
