#pragma once

// Independent reference computations for the scheme rates. Regions are written
// directly on link flows, and time sharing is searched on a grid instead of
// being optimized jointly with the flows.

#include <map>
#include <utility>
#include <vector>

#include "hdrelay/network.hpp"
#include "hdrelay/states.hpp"

namespace oracle {

using hdrelay::Network;
using hdrelay::NodeId;
using hdrelay::State;

/// Sum of the flows on `links` is at most `rhs` per unit of time share.
struct Cap {
  std::vector<std::pair<int, int>> links;
  double rhs = 0.0;
};

struct Region {
  std::vector<std::pair<int, int>> links;
  std::vector<Cap> caps;
};

double capacity(double snr);

Region cb(const Network& net, const State& s);
/// alpha[{i, j}] is the power share of transmitter i for receiver j.
Region sc(const Network& net, const State& s, const std::map<std::pair<int, int>, double>& alpha);
Region dpc(const Network& net, const State& s, int r);

std::map<std::pair<int, int>, double> equal_split(const Network& net, const State& s);

enum class Scheme { IA, CB, SC, DPC };

/// One region per scheduled block: IA keeps single-transmitter states, SC uses the
/// equal split, and DPC codes towards the source's only active receiver when there
/// is exactly one, falling back to common broadcast otherwise.
std::vector<Region> scheme_regions(const Network& net, const std::vector<State>& states, Scheme scheme);

/// Best rate over time shares on the grid {0, 1/steps, ..., 1} summing to one.
double brute_force_rate(const Network& net, const std::vector<Region>& regions, int steps = 50);

/// Best rate at fixed time shares.
double rate_at(const Network& net, const std::vector<Region>& regions, const std::vector<double>& lambda);

}  // namespace oracle
