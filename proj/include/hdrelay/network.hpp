#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hdrelay/error.hpp"

namespace hdrelay {

/// 1-based node identifier as it appears in network files.
struct NodeId {
  int value = 0;

  constexpr std::size_t index() const { return static_cast<std::size_t>(value - 1); }
  auto operator<=>(const NodeId&) const = default;
};

inline constexpr int kMaxNodes = 32;

/// Set of node ids packed into a bit mask (bit i-1 for node i).
class NodeSet {
 public:
  constexpr NodeSet() = default;
  constexpr explicit NodeSet(std::uint32_t bits) : bits_(bits) {}
  NodeSet(std::initializer_list<int> ids) {
    for (int id : ids) insert(NodeId{id});
  }

  constexpr bool contains(NodeId n) const { return (bits_ >> n.index()) & 1u; }
  constexpr void insert(NodeId n) { bits_ |= 1u << n.index(); }
  constexpr void erase(NodeId n) { bits_ &= ~(1u << n.index()); }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }

  /// Members in ascending id order.
  std::vector<NodeId> members() const {
    std::vector<NodeId> out;
    for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(NodeId{std::countr_zero(b) + 1});
    return out;
  }

  friend constexpr NodeSet operator&(NodeSet a, NodeSet b) { return NodeSet(a.bits_ & b.bits_); }
  friend constexpr NodeSet operator|(NodeSet a, NodeSet b) { return NodeSet(a.bits_ | b.bits_); }
  friend constexpr NodeSet operator-(NodeSet a, NodeSet b) { return NodeSet(a.bits_ & ~b.bits_); }
  friend constexpr bool operator==(NodeSet a, NodeSet b) = default;

  /// Lexicographic comparison of the sorted member lists.
  friend bool lex_less(NodeSet a, NodeSet b) {
    auto x = a.members(), y = b.members();
    return x < y;
  }

 private:
  std::uint32_t bits_ = 0;
};

std::string to_string(NodeSet s);  // "{1,3,4}"

struct Edge {
  NodeId u;
  NodeId v;
  /// Literal gain, or the name of a class resolved through Network::classes().
  std::variant<double, std::string> gain;

  bool operator==(const Edge&) const = default;
};

class Network {
 public:
  /// Validates everything; throws ValidationError naming the offending field.
  Network(int nodes, NodeId source, NodeId sink, double power, double noise,
          std::map<std::string, double> classes, std::vector<Edge> edges);

  int node_count() const { return nodes_; }
  NodeId source() const { return source_; }
  NodeId sink() const { return sink_; }
  double power() const { return power_; }
  double noise() const { return noise_; }
  double snr() const { return power_ / noise_; }
  const std::map<std::string, double>& classes() const { return classes_; }
  /// Normalized so that u < v, sorted by (u, v).
  const std::vector<Edge>& edges() const { return edges_; }

  NodeSet all_nodes() const { return NodeSet(nodes_ == 32 ? ~0u : (1u << nodes_) - 1); }

  /// Resolved h_ij, 0 when no edge. Throws ValidationError for ids out of range.
  double gain(NodeId i, NodeId j) const;
  double resolve(const Edge& e) const;
  /// Nodes joined to `n` by an edge with positive gain.
  NodeSet neighbors(NodeId n) const { return neighbors_.at(checked(n).index()); }
  bool connected(NodeId i, NodeId j) const { return neighbors(i).contains(j); }

  /// True when a positive-gain path joins source and sink.
  bool has_source_sink_path() const;
  std::vector<std::string> warnings() const;

  /// Same network with one class gain rebound.
  Network with_class(const std::string& name, double value) const;
  /// Same network with power and noise replaced.
  Network with_power_noise(double power, double noise) const;

  bool operator==(const Network& other) const;

 private:
  NodeId checked(NodeId n) const;

  int nodes_;
  NodeId source_;
  NodeId sink_;
  double power_;
  double noise_;
  std::map<std::string, double> classes_;
  std::vector<Edge> edges_;
  std::vector<double> gains_;  // dense nodes_ x nodes_
  std::vector<NodeSet> neighbors_;
};

inline Network set_class(const Network& net, const std::string& name, double value) {
  return net.with_class(name, value);
}

/// Half of log2(1 + snr): capacity of a real AWGN channel in bits per use.
double awgn_capacity(double snr);

Network parse_network(std::string_view text);
std::string serialize(const Network& net);

/// Loads `spec` as a file path, or as the name of a built-in network
/// (`twonode`, `line`, `diamond`, `twostage`, `grid4x3`, with or without extension).
Network load_network(const std::string& spec);
std::vector<std::string> builtin_network_names();
/// Raw text of a built-in network; throws ValidationError when unknown.
std::string builtin_network_text(const std::string& name);

std::string read_text_file(const std::string& path);

}  // namespace hdrelay
