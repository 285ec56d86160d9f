#pragma once

// Scheme evaluation, parameter sweeps and human-readable reports on top of the
// bound and flow solvers.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hdrelay/cutset.hpp"
#include "hdrelay/flowopt.hpp"

namespace hdrelay {

struct AnalysisOptions {
  StateSelection states;
  CutOptions cut;
  FlowOptions flow;
  ScSearchConfig sc;
};

/// A sweep column: one achievable scheme or the upper bound.
enum class Quantity { IA, CB, SC, DPC, Bound };
const char* to_string(Quantity q);
Quantity parse_quantity(const std::string& text);
/// Comma-separated list such as "ia,cb,bound"; duplicates are rejected.
std::vector<Quantity> parse_quantity_list(std::string_view text);

struct RateReport {
  SchemeSolution solution;
  std::vector<State> states;
  std::vector<std::string> warnings;
};

RateReport compute_rate(const Network& net, Scheme scheme, const AnalysisOptions& opt);
BoundResult compute_bound(const Network& net, const AnalysisOptions& opt);
double evaluate(const Network& net, Quantity q, const AnalysisOptions& opt);

enum class Spacing { Linear, Log };

struct SweepSpec {
  std::string parameter;  // class name whose gain varies
  double from = 1.0;
  double to = 1.0;
  int points = 2;
  Spacing spacing = Spacing::Linear;
  std::vector<Quantity> quantities = {Quantity::IA, Quantity::CB, Quantity::SC, Quantity::DPC, Quantity::Bound};
  AnalysisOptions options;
  /// Point i searches with seed + i.
  std::uint64_t seed = 1;
  /// Points evaluated concurrently; 0 uses the hardware concurrency.
  unsigned threads = 0;
};

/// Throws ValidationError for a bad range, point count or empty column list.
void validate(const SweepSpec& spec, const Network& net);
std::vector<double> sweep_values(const SweepSpec& spec);

struct SweepRow {
  double parameter = 0.0;
  std::vector<double> values;  // per spec.quantities
};

/// Evaluates every point and writes the CSV. When a point fails, the rows before it
/// are written, followed by an `error` row, and the exception is rethrown.
std::vector<SweepRow> run_sweep(const Network& net, const SweepSpec& spec, std::ostream& csv);

/// Nine significant digits, as used in every CSV cell.
std::string format_number(double v);

void write_bound_report(std::ostream& out, const Network& net, const BoundResult& bound);
void write_rate_report(std::ostream& out, const RateReport& rate);

}  // namespace hdrelay
