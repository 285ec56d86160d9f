#pragma once

#include <vector>

#include "hdrelay/flowopt.hpp"

namespace hdrelay::detail {

/// Flow program over a subset of blocks. Without names, variables and rows are anonymous.
lp::LinearProgram build_flow_program(const Network& net, const std::vector<const ConstraintSet*>& blocks,
                                     FlowLayout& layout, bool named = true);

BlockSolution extract_block(const ConstraintSet& cs, const FlowLayout& layout, std::size_t k,
                            const std::vector<double>& x);

BlockSolution idle_block(const ConstraintSet& cs);

}  // namespace hdrelay::detail
