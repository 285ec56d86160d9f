#include <doctest.h>

#include <algorithm>
#include <random>

#include "hdrelay/error.hpp"
#include "hdrelay/flowopt.hpp"
#include "support/checks.hpp"
#include "support/oracle.hpp"
#include "support/random_networks.hpp"

using namespace hdrelay;

namespace {

State st(std::initializer_list<int> tx, std::initializer_list<int> rx) { return {NodeSet(tx), NodeSet(rx)}; }

void check_certificate_ok(const Network& net, const SchemeSolution& sol) {
  const auto c = check_certificate(net, sol);
  CHECK(c.flow_residual <= 1e-8);
  CHECK(c.share_excess <= 1e-8);
  CHECK(c.region_violation <= 1e-8);
  CHECK(c.negativity <= 1e-8);
}

double lambda_of(const SchemeSolution& sol, const State& s) {
  double total = 0.0;
  for (const auto& b : sol.blocks)
    if (b.region.state == s) total += b.lambda;
  return total;
}

ScSearchConfig quick_search() {
  ScSearchConfig cfg;
  cfg.starts = 4;
  cfg.threads = 1;
  return cfg;
}

void check_against_oracle(const Network& net, const std::vector<State>& states) {
  CHECK(testing::oracle_gap(net, states) <= 1.0 / 50 + 1e-6);
}

}  // namespace

TEST_CASE("line network") {
  const auto net = load_network("line");
  const auto sol = solve_linear_scheme(net, ia_states(net), Scheme::IA);
  CHECK(sol.rate == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(lambda_of(sol, st({1}, {2})) == doctest::Approx(0.5));
  CHECK(lambda_of(sol, st({2}, {3})) == doctest::Approx(0.5));
  check_certificate_ok(net, sol);
  CHECK(solve_linear_scheme(net, scheme_states(net, {}), Scheme::CB).rate == doctest::Approx(0.5));
}

TEST_CASE("diamond with alternating relays") {
  const auto net = load_network("diamond");
  const std::vector<State> states = {st({1, 2}, {3, 4}), st({1, 3}, {2, 4})};
  const auto cb = solve_linear_scheme(net, states, Scheme::CB);
  CHECK(cb.rate == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lambda_of(cb, states[0]) == doctest::Approx(0.5));
  CHECK(lambda_of(cb, states[1]) == doctest::Approx(0.5));
  check_certificate_ok(net, cb);

  // Every transmitter has one receiver, so the power split is forced.
  const auto sc = solve_sc(net, states, quick_search());
  CHECK(sc.rate == doctest::Approx(cb.rate).epsilon(1e-12));
  check_certificate_ok(net, sc);
}

TEST_CASE("two-stage network at a strong inner stage") {
  const auto net = load_network("twostage").with_class("beta", 10.0);
  const auto states = scheme_states(net, {});
  const auto cb = solve_linear_scheme(net, states, Scheme::CB);
  CHECK(cb.rate == doctest::Approx(1.0).epsilon(1e-3));
  check_certificate_ok(net, cb);

  // Equal time on S3 and S4 alone reaches the bound.
  const std::vector<State> pair = {st({1, 3, 4}, {2, 5, 6}), st({1, 2, 5}, {3, 4, 6})};
  const auto on_pair = solve_linear_scheme(net, pair, Scheme::CB);
  CHECK(on_pair.rate == doctest::Approx(1.0).epsilon(1e-3));
  FlowLayout layout;
  auto prog = build_flow_program(net, scheme_blocks(net, pair, Scheme::CB), layout);
  for (int v : layout.lambda) prog.add_constraint("pin", {{v, 1.0}}, lp::Relation::Equal, 0.5);
  const auto pinned = lp::solve(prog);
  REQUIRE(pinned.optimal());
  CHECK(pinned.objective == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(oracle::rate_at(net, {oracle::cb(net, pair[0]), oracle::cb(net, pair[1])}, {0.5, 0.5}) ==
        doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("dirty-paper coding at a strong cross stage") {
  const auto net = load_network("twostage").with_class("gamma", 2.0);
  const auto sol = solve_dpc(net, scheme_states(net, {}));
  CHECK(sol.rate == doctest::Approx(1.0).epsilon(1e-6));
  check_certificate_ok(net, sol);
  const std::vector<State> pair = {st({1, 2, 4}, {3, 5, 6}), st({1, 3, 5}, {2, 4, 6})};
  CHECK(solve_dpc(net, pair).rate == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("dirty-paper coding without the source falls back to common broadcast") {
  const auto net = load_network("twostage").with_class("gamma", 0.5);
  std::vector<State> quiet;
  for (const auto& s : mdf_states(net))
    if (!s.tx.contains(net.source())) quiet.push_back(s);
  quiet.push_back(st({1}, {2, 3}));
  const auto blocks = scheme_blocks(net, quiet, Scheme::DPC);
  for (const auto& b : blocks) CHECK_FALSE(b.dpc_receiver.has_value());
  CHECK(solve_dpc(net, quiet).rate == doctest::Approx(solve_linear_scheme(net, quiet, Scheme::CB).rate).epsilon(1e-9));
}

TEST_CASE("superposition helps at a weak inner stage") {
  const auto net = load_network("twostage").with_class("beta", 0.1);
  const auto states = scheme_states(net, {});
  ScSearchConfig cfg;
  cfg.threads = 1;
  const auto sc = solve_sc(net, states, cfg);
  const auto cb = solve_linear_scheme(net, states, Scheme::CB);
  CHECK(sc.rate >= cb.rate + 0.02);
  check_certificate_ok(net, sc);
  for (const auto& b : sc.blocks) {
    REQUIRE(b.split.has_value());
    CHECK_NOTHROW(b.split->validate(StateView(net, b.region.state)));
  }
}

TEST_CASE("column generation matches the full program at the final splits") {
  const auto net = load_network("twostage").with_class("gamma", 0.3);
  const auto states = scheme_states(net, {});
  const auto sc = solve_sc(net, states, quick_search());
  std::vector<State> all;
  std::vector<PowerSplit> splits;
  for (const auto& b : sc.blocks) {
    all.push_back(b.region.state);
    splits.push_back(*b.split);
  }
  CHECK(solve_sc_fixed(net, all, splits).rate == doctest::Approx(sc.rate).epsilon(1e-9));
}

TEST_CASE("search is deterministic and monotone in effort") {
  const auto net = load_network("twostage").with_class("gamma", 0.1);
  const auto states = scheme_states(net, {});
  auto cfg = quick_search();
  const auto a = solve_sc(net, states, cfg);
  cfg.threads = 3;
  const auto b = solve_sc(net, states, cfg);
  CHECK(a.rate == b.rate);
  CHECK(a.best_start == b.best_start);
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (std::size_t k = 0; k < a.blocks.size(); ++k) {
    CHECK(a.blocks[k].lambda == b.blocks[k].lambda);
    CHECK(a.blocks[k].split == b.blocks[k].split);
  }
  double previous = 0.0;
  for (int starts = 1; starts <= 4; ++starts) {
    cfg.starts = starts;
    const double rate = solve_sc(net, states, cfg).rate;
    CHECK(rate >= previous - 1e-9);
    previous = rate;
  }
  CHECK(previous == a.rate);
}

TEST_CASE("invalid requests") {
  const auto net = load_network("line");
  CHECK_THROWS_AS(solve_linear_scheme(net, {}, Scheme::CB), ValidationError);
  CHECK_THROWS_AS(solve_linear_scheme(net, ia_states(net), Scheme::SC), ValidationError);
  CHECK_THROWS_AS(solve_sc(net, {}, {}), ValidationError);
  CHECK_THROWS_AS(solve_sc_fixed(net, ia_states(net), {}), ValidationError);
  CHECK_THROWS_AS(solve_linear_scheme(net, {st({3}, {1})}, Scheme::CB), ValidationError);
}

TEST_CASE("fixtures agree with the grid search") {
  const auto line = load_network("line");
  check_against_oracle(line, ia_states(line));
  CHECK(oracle::brute_force_rate(line, oracle::scheme_regions(line, ia_states(line), oracle::Scheme::IA)) ==
        doctest::Approx(0.5).epsilon(1e-9));

  const auto diamond = load_network("diamond");
  const std::vector<State> alternating = {st({1, 2}, {3, 4}), st({1, 3}, {2, 4})};
  check_against_oracle(diamond, alternating);
  CHECK(oracle::brute_force_rate(diamond, oracle::scheme_regions(diamond, alternating, oracle::Scheme::CB)) ==
        doctest::Approx(1.0).epsilon(1e-9));
  check_against_oracle(diamond, {st({1}, {2, 3}), st({2, 3}, {4}), st({1, 2}, {3, 4}), st({1, 3}, {2, 4})});

  const auto twonode = load_network("twonode");
  check_against_oracle(twonode, {st({1}, {2})});
  CHECK(oracle::brute_force_rate(twonode, {oracle::cb(twonode, st({1}, {2}))}) == doctest::Approx(1.0));
}

TEST_CASE("random small networks agree with the grid search") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = testing::random_network(rng, 3 + trial % 2);
    auto pool = scheme_states(net, {});
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min<std::size_t>(pool.size(), 3));
    std::sort(pool.begin(), pool.end(), canonical_less);
    CAPTURE(trial);
    check_against_oracle(net, pool);
  }
}
