#include <doctest.h>

#include <random>

#include "support/checks.hpp"
#include "support/random_networks.hpp"

using namespace hdrelay;

TEST_CASE("random networks: ordering, certificates, monotonicity and scale invariance") {
  std::mt19937_64 rng(20240501);
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = testing::random_network(rng, 3 + trial % 4);
    CAPTURE(trial);
    CAPTURE(serialize(net));
    const auto rep = testing::check_properties(net, rng);
    CHECK(rep.sandwich <= 1e-6);
    CHECK(rep.certificate <= 1e-8);
    CHECK(rep.gain_growth <= 1e-9);
    CHECK(rep.more_states <= 1e-9);
    CHECK(rep.scaling <= 1e-9);
  }
}
