#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdrelay/network.hpp"

namespace hdrelay {

/// One half-duplex operating mode: who transmits and who listens.
struct State {
  NodeSet tx;
  NodeSet rx;

  bool operator==(const State&) const = default;
};

/// Canonical order: transmitter count, then transmitter ids, then receiver ids.
bool canonical_less(const State& a, const State& b);
std::string to_string(const State& s);  // "({1,3,4},{2,5,6})"

/// Throws ValidationError unless tx and rx are disjoint, in range, the source
/// never listens and the sink never transmits.
void validate_state(const Network& net, const State& s);

/// Drops transmitters with no positive-gain edge into rx, and receivers with no
/// such edge from tx, until nothing changes.
State prune(const Network& net, State s);

/// All role-constrained states with at most `max_tx` transmitters, in canonical order.
/// With `prune`, degenerate nodes are removed, duplicates merged and empty states dropped.
std::vector<State> enumerate_states(const Network& net, std::optional<int> max_tx, bool prune);

/// Pruned single-transmitter states.
std::vector<State> ia_states(const Network& net);

/// Pruned states with at most two transmitters, plus pruned three-transmitter
/// states in which the source transmits and the sink receives.
std::vector<State> mdf_states(const Network& net);

/// One state per hop offset along node-disjoint source-sink paths, each path
/// shifted by its index so that the source transmits and the sink receives
/// whenever the path count allows it. Messages about relaxed requirements are
/// appended to `warnings`.
std::vector<State> path_schedule(const Network& net, const std::vector<std::vector<NodeId>>& paths,
                                 std::vector<std::string>* warnings = nullptr);

/// Parses "2-4-7-11,2-5-8-11".
std::vector<std::vector<NodeId>> parse_paths(std::string_view text);

/// Neighbor structure of one state.
class StateView {
 public:
  StateView(const Network& net, const State& s);

  const State& state() const { return state_; }
  /// Connected receivers of transmitter i, strongest first, ties by ascending id.
  const std::vector<NodeId>& receivers(NodeId i) const { return receivers_[i.index()]; }
  /// Connected transmitters of receiver j, ascending id.
  const std::vector<NodeId>& transmitters(NodeId j) const { return transmitters_[j.index()]; }
  int degree(NodeId i) const { return static_cast<int>(receivers(i).size()); }
  /// 1-based position of j in receivers(i), or 0 when not connected.
  int rank(NodeId i, NodeId j) const;

 private:
  State state_;
  std::array<std::vector<NodeId>, kMaxNodes> receivers_;
  std::array<std::vector<NodeId>, kMaxNodes> transmitters_;
};

inline StateView view(const Network& net, const State& s) { return StateView(net, s); }

enum class StateSource { Auto, IaOnly, File, Paths };

struct StateSelection {
  StateSource source = StateSource::Auto;
  std::vector<State> listed;                 // File
  std::vector<std::vector<NodeId>> paths;    // Paths
  std::optional<int> max_tx;                 // Auto: enumerate all pruned states up to this size
};

inline constexpr int kFullEnumerationLimit = 8;

/// States offered to the achievable schemes: the IA states plus the selection.
std::vector<State> scheme_states(const Network& net, const StateSelection& sel,
                                 std::vector<std::string>* warnings = nullptr);

struct BoundStates {
  std::vector<State> states;
  /// True when the bound only holds relative to a restricted state set.
  bool relative = false;
};

BoundStates bound_states(const Network& net, const StateSelection& sel);

std::vector<State> parse_states(std::string_view text, const Network& net);
std::string serialize_states(const std::vector<State>& states);

}  // namespace hdrelay
