#pragma once

#include <ostream>
#include <vector>

#include "hdrelay/lp.hpp"
#include "hdrelay/states.hpp"

namespace hdrelay {

/// Source-side node set of a source/sink partition.
struct Cut {
  NodeSet omega;
  bool operator==(const Cut&) const = default;
};

std::vector<Cut> enumerate_cuts(const Network& net);

enum class CutTag { Empty, PointToPoint, Mac, Broadcast, Mimo };
const char* to_string(CutTag tag);

enum class BroadcastRule {
  BestUser,   // degraded broadcast sum capacity
  SimoCoop,   // receivers cooperate: log det over the receive vector
};

enum class MimoRule {
  EqualPower,   // Q = P I
  Cooperative,  // best Q with diag(Q) <= P, by projected gradient ascent
};

struct CutOptions {
  BroadcastRule broadcast = BroadcastRule::BestUser;
  MimoRule mimo = MimoRule::EqualPower;
};

struct CutEntry {
  double value = 0.0;
  CutTag tag = CutTag::Empty;
};

/// Mutual information carried across `cut` while the network is in state `s`.
/// Transmitters and receivers without a crossing edge are dropped before the
/// channel is classified.
CutEntry cut_capacity(const Network& net, const Cut& cut, const State& s, const CutOptions& opt = {});

/// 1/2 log2 det(I + snr H Q H^T / P) maximized over Q >= 0 with diagonal entries at most P.
/// `h` is row-major, rows = receivers.
double cooperative_mimo_capacity(const std::vector<double>& h, int rows, int cols, double snr);

struct CutCapacityTable {
  std::vector<Cut> cuts;
  std::vector<State> states;
  std::vector<std::vector<CutEntry>> entries;  // [cut][state]
};

CutCapacityTable capacity_table(const Network& net, const std::vector<State>& states, const CutOptions& opt = {});

/// One CSV line per (cut, state) pair: cut, state, channel class, capacity.
void write_capacity_table_csv(std::ostream& out, const CutCapacityTable& table);

struct BoundResult {
  double rate = 0.0;
  std::vector<double> lambda;  // per state
  CutCapacityTable table;
  std::vector<bool> binding;   // per cut
  std::vector<double> cut_values;  // sum_k lambda_k C[cut][k]
  bool relative = false;
  lp::Status status = lp::Status::Invalid;
};

/// Time-sharing bound: max R s.t. R <= sum_k lambda_k C[cut][k] for every cut,
/// sum lambda = 1. Throws SolverError when the program does not solve.
BoundResult cutset_bound(const Network& net, const std::vector<State>& states, const CutOptions& opt = {},
                         const lp::SolverOptions& lp_options = {});

}  // namespace hdrelay
