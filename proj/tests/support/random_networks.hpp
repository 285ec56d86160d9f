#pragma once

#include <random>

#include "hdrelay/network.hpp"

namespace hdrelay::testing {

/// Portable uniform draw in [0, 1) from the top 53 bits.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Gain drawn log-uniformly from [0.1, 10].
inline double log_uniform_gain(std::mt19937_64& rng) { return std::pow(10.0, 2.0 * unit(rng) - 1.0); }

/// Random network on m nodes with S = 1, D = m and a guaranteed S-D path.
/// About half the edges are bound to classes so rebinding is exercised too.
Network random_network(std::mt19937_64& rng, int m, double edge_probability = 0.5);

/// Same network with every gain, power and noise rounded to `digits` significant digits.
Network round_gains(const Network& net, int digits);

}  // namespace hdrelay::testing
