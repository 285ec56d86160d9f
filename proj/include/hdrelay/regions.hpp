#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hdrelay/states.hpp"

namespace hdrelay {

enum class Scheme { IA, CB, SC, DPC };
const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& text);

struct Link {
  NodeId from;
  NodeId to;
  bool operator==(const Link&) const = default;
};

/// Rate variable of one state's region.
struct RateVar {
  enum class Kind {
    TxTotal,    // R_i: total rate leaving transmitter i; bounds the sum of its link flows
    Link,       // R_ij: rate on one link
    SourceDpc,  // R_s: dirty-paper coded source rate towards its chosen receiver
  };
  Kind kind = Kind::Link;
  NodeId tx;
  NodeId rx;  // unused for TxTotal
};

struct RegionRow {
  enum class Kind {
    Mac,   // common messages of a transmitter subset at receiver `at`
    Link,  // own-link cap of a superposed codeword
    Sic,   // joint decoding of a codeword subset at receiver `at`
    Dpc,   // dirty-paper coded source link
  };
  std::vector<int> vars;  // indices into ConstraintSet::vars, coefficient 1 each
  double rhs = 0.0;
  Kind kind = Kind::Mac;
  NodeId at;
};

/// Linear description of one state's achievable rate region.
struct ConstraintSet {
  Scheme scheme = Scheme::CB;
  State state;
  std::optional<NodeId> dpc_receiver;
  std::vector<Link> links;     // links that may carry flow in this state
  std::vector<RateVar> vars;
  std::vector<RegionRow> rows;

  int find_link(NodeId from, NodeId to) const;
  int find_var(RateVar::Kind kind, NodeId tx, NodeId rx = {}) const;
};

inline constexpr int kMaxSubsetDegree = 20;

/// Multiple-access constraints at every receiver over each nonempty subset of its transmitters.
ConstraintSet cb_region(const Network& net, const State& s);
/// Single-transmitter specialization of cb_region; throws ValidationError otherwise.
ConstraintSet ia_region(const Network& net, const State& s);

/// Power split of every transmitter over its receivers.
class PowerSplit {
 public:
  PowerSplit() = default;
  /// All power to the strongest receiver (the only one for degree-one transmitters).
  static PowerSplit strongest(const StateView& v);
  static PowerSplit weakest(const StateView& v);
  static PowerSplit equal(const StateView& v);

  double alpha(NodeId i, NodeId j) const;
  void set(NodeId i, NodeId j, double a) { alpha_[{i.value, j.value}] = a; }
  const std::map<std::pair<int, int>, double>& entries() const { return alpha_; }

  /// Throws ValidationError if any share is outside [0, 1] or a transmitter's total exceeds 1.
  void validate(const StateView& v) const;

  bool operator==(const PowerSplit&) const = default;

 private:
  std::map<std::pair<int, int>, double> alpha_;
};

/// Superposition coding with successive cancellation at every receiver.
ConstraintSet sc_region(const Network& net, const State& s, const PowerSplit& split);

enum class DpcInterference {
  Reject,  // a source edge into another active receiver disqualifies the receiver choice
  Noise,   // such receivers treat the source signal as extra noise
};

/// Receivers r the source may dirty-paper code towards in state `s`.
std::vector<NodeId> dpc_receivers(const Network& net, const State& s, DpcInterference mode);

/// Source codes towards `r` free of relay interference; relays use common broadcast
/// towards every receiver except `r`, which decodes the source alone.
ConstraintSet dpc_region(const Network& net, const State& s, NodeId r,
                         DpcInterference mode = DpcInterference::Reject);

/// Short text such as "mac@4{2,3}" or "sic@6{4>6 5>6}".
std::string row_label(const ConstraintSet& cs, const RegionRow& row);

/// Name of a rate variable: "R2" (transmitter total), "R2>4" (link) or "Rs1>2" (dirty-paper source).
std::string var_name(const RateVar& v);

/// One CSV line per row: state, label, variables, coefficients and right-hand side.
/// The header is written when `header` is set.
void write_region_csv(std::ostream& out, const ConstraintSet& cs, bool header = true);

/// Value of each row's left side for the given per-variable rates.
std::vector<double> row_values(const ConstraintSet& cs, const std::vector<double>& rates);

}  // namespace hdrelay
