#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hdrelay/lp.hpp"
#include "hdrelay/regions.hpp"

namespace hdrelay {

struct FlowOptions {
  lp::SolverOptions lp;
  DpcInterference dpc = DpcInterference::Reject;
};

/// Optimal operation of one (possibly DPC-expanded) state.
struct BlockSolution {
  ConstraintSet region;
  double lambda = 0.0;
  std::vector<double> link_flow;  // per region.links, already scaled by the time share
  std::vector<double> rates;      // per region.vars, already scaled by the time share
  std::optional<PowerSplit> split;
};

struct SchemeSolution {
  Scheme scheme = Scheme::CB;
  double rate = 0.0;
  lp::Status status = lp::Status::Invalid;
  std::vector<BlockSolution> blocks;

  // Search statistics (superposition coding only).
  int starts = 0;
  int skipped_starts = 0;
  int best_start = -1;
  std::vector<double> start_rates;

  /// Indices of blocks with time share above `tol`.
  std::vector<std::size_t> active(double tol = 1e-9) const;
};

/// Region blocks for a scheme over `states` (DPC expands source states per receiver choice,
/// IA keeps only single-transmitter states). SC blocks use the equal power split.
std::vector<ConstraintSet> scheme_blocks(const Network& net, const std::vector<State>& states, Scheme scheme,
                                         const FlowOptions& opt = {});

/// Variable and row indices of an assembled flow program.
struct FlowLayout {
  int rate = 0;
  std::vector<int> lambda;                  // per block
  std::vector<std::vector<int>> link_var;   // per block, per link
  std::vector<std::vector<int>> total_var;  // per block, per rate var (-1 unless TxTotal)
  std::vector<int> conservation_row;        // per node index
  int share_row = 0;
};

/// max R subject to flow conservation, sum of time shares at most 1 and the
/// time-scaled region rows of every block.
lp::LinearProgram build_flow_program(const Network& net, const std::vector<ConstraintSet>& blocks,
                                     FlowLayout& layout);

/// Solves the full program over the given blocks. Throws SolverError on failure.
SchemeSolution solve_blocks(const Network& net, std::vector<ConstraintSet> blocks, Scheme scheme,
                            const lp::SolverOptions& lp_options = {});

/// IA, CB or DPC over the given states.
SchemeSolution solve_linear_scheme(const Network& net, const std::vector<State>& states, Scheme scheme,
                                   const FlowOptions& opt = {});
SchemeSolution solve_dpc(const Network& net, const std::vector<State>& states, const FlowOptions& opt = {});

struct ScSearchConfig {
  std::uint64_t seed = 1;
  /// Equal, strongest and weakest splits first, then random simplex samples.
  int starts = 20;
  std::vector<double> steps = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  double cycle_tolerance = 1e-7;
  /// Also tune the splits of states outside the working set while pricing them.
  bool split_aware_pricing = true;
  /// Worker threads for the starts; 0 uses the hardware concurrency.
  unsigned threads = 0;
  lp::SolverOptions lp;
};

/// Superposition coding: multistart coordinate ascent over power splits with an
/// exact column-generated flow program inside.
SchemeSolution solve_sc(const Network& net, const std::vector<State>& states, const ScSearchConfig& cfg = {});

/// Superposition coding at fixed splits (one per state), solved exactly.
SchemeSolution solve_sc_fixed(const Network& net, const std::vector<State>& states,
                              const std::vector<PowerSplit>& splits, const lp::SolverOptions& lp_options = {});

SchemeSolution solve_scheme(const Network& net, const std::vector<State>& states, Scheme scheme,
                            const FlowOptions& opt = {}, const ScSearchConfig& sc = {});

struct Certificate {
  double flow_residual = 0.0;     // worst conservation error over nodes
  double share_excess = 0.0;      // max(0, sum lambda - 1)
  double region_violation = 0.0;  // worst row excess over lambda * rhs, and total-rate excess
  double negativity = 0.0;        // most negative flow, rate or share
};

/// Re-checks a solution against its own regions.
Certificate check_certificate(const Network& net, const SchemeSolution& sol);

}  // namespace hdrelay
