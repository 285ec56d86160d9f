#include "hdrelay/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace hdrelay {

std::string to_string(NodeSet s) {
  std::string out = "{";
  bool first = true;
  for (auto n : s.members()) {
    if (!first) out += ",";
    out += std::to_string(n.value);
    first = false;
  }
  return out + "}";
}

double awgn_capacity(double snr) { return 0.5 * std::log2(1.0 + snr); }

namespace {

bool valid_class_name(const std::string& name) {
  if (name.empty() || std::isdigit(static_cast<unsigned char>(name[0]))) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string edge_path(std::size_t i) { return "edges[" + std::to_string(i) + "]"; }

}  // namespace

Network::Network(int nodes, NodeId source, NodeId sink, double power, double noise,
                 std::map<std::string, double> classes, std::vector<Edge> edges)
    : nodes_(nodes), source_(source), sink_(sink), power_(power), noise_(noise),
      classes_(std::move(classes)), edges_(std::move(edges)) {
  if (nodes_ < 2 || nodes_ > kMaxNodes)
    throw ValidationError("nodes: must be between 2 and " + std::to_string(kMaxNodes));
  auto in_range = [&](NodeId n) { return n.value >= 1 && n.value <= nodes_; };
  if (!in_range(source_)) throw ValidationError("source: node id out of range");
  if (!in_range(sink_)) throw ValidationError("sink: node id out of range");
  if (source_ == sink_) throw ValidationError("sink: source and sink must differ");
  if (!std::isfinite(power_) || power_ <= 0) throw ValidationError("power: must be finite and > 0");
  if (!std::isfinite(noise_) || noise_ <= 0) throw ValidationError("noise: must be finite and > 0");
  for (const auto& [name, value] : classes_) {
    if (!valid_class_name(name)) throw ValidationError("classes." + name + ": invalid class name");
    if (!std::isfinite(value) || value < 0)
      throw ValidationError("classes." + name + ": gain must be finite and >= 0");
  }

  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    auto& e = edges_[i];
    if (!in_range(e.u)) throw ValidationError(edge_path(i) + ".u: node id out of range");
    if (!in_range(e.v)) throw ValidationError(edge_path(i) + ".v: node id out of range");
    if (e.u == e.v) throw ValidationError(edge_path(i) + ": self-loop on node " + std::to_string(e.u.value));
    if (e.v < e.u) std::swap(e.u, e.v);
    if (!seen.insert({e.u.value, e.v.value}).second)
      throw ValidationError(edge_path(i) + ": duplicate edge " + std::to_string(e.u.value) + "-" +
                            std::to_string(e.v.value));
    if (const auto* name = std::get_if<std::string>(&e.gain)) {
      if (!classes_.contains(*name)) throw ValidationError(edge_path(i) + ".class: unknown class '" + *name + "'");
    } else {
      double g = std::get<double>(e.gain);
      if (!std::isfinite(g) || g < 0) throw ValidationError(edge_path(i) + ".gain: must be finite and >= 0");
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });

  const auto m = static_cast<std::size_t>(nodes_);
  gains_.assign(m * m, 0.0);
  neighbors_.assign(m, NodeSet{});
  for (const auto& e : edges_) {
    double g = resolve(e);
    gains_[e.u.index() * m + e.v.index()] = g;
    gains_[e.v.index() * m + e.u.index()] = g;
    if (g > 0) {
      neighbors_[e.u.index()].insert(e.v);
      neighbors_[e.v.index()].insert(e.u);
    }
  }
}

NodeId Network::checked(NodeId n) const {
  if (n.value < 1 || n.value > nodes_)
    throw ValidationError("node id " + std::to_string(n.value) + " out of range 1.." + std::to_string(nodes_));
  return n;
}

double Network::resolve(const Edge& e) const {
  if (const auto* name = std::get_if<std::string>(&e.gain)) return classes_.at(*name);
  return std::get<double>(e.gain);
}

double Network::gain(NodeId i, NodeId j) const {
  checked(i);
  checked(j);
  return gains_[i.index() * static_cast<std::size_t>(nodes_) + j.index()];
}

bool Network::has_source_sink_path() const {
  NodeSet reached{}, frontier{};
  reached.insert(source_);
  frontier.insert(source_);
  while (!frontier.empty()) {
    NodeSet next{};
    for (auto n : frontier.members()) next = next | neighbors_[n.index()];
    frontier = next - reached;
    reached = reached | next;
  }
  return reached.contains(sink_);
}

std::vector<std::string> Network::warnings() const {
  std::vector<std::string> out;
  if (!has_source_sink_path()) out.push_back("no path with positive gains joins source and sink");
  return out;
}

Network Network::with_class(const std::string& name, double value) const {
  if (!classes_.contains(name)) throw ValidationError("unknown class '" + name + "'");
  if (!std::isfinite(value) || value < 0)
    throw ValidationError("class '" + name + "': gain must be finite and >= 0");
  auto classes = classes_;
  classes[name] = value;
  return Network(nodes_, source_, sink_, power_, noise_, std::move(classes), edges_);
}

Network Network::with_power_noise(double power, double noise) const {
  return Network(nodes_, source_, sink_, power, noise, classes_, edges_);
}

bool Network::operator==(const Network& o) const {
  return nodes_ == o.nodes_ && source_ == o.source_ && sink_ == o.sink_ && power_ == o.power_ &&
         noise_ == o.noise_ && classes_ == o.classes_ && edges_ == o.edges_;
}

}  // namespace hdrelay
