#include "hdrelay/states.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hdrelay {

bool canonical_less(const State& a, const State& b) {
  if (a.tx.size() != b.tx.size()) return a.tx.size() < b.tx.size();
  auto ta = a.tx.members(), tb = b.tx.members();
  if (ta != tb) return ta < tb;
  return a.rx.members() < b.rx.members();
}

std::string to_string(const State& s) { return "(" + to_string(s.tx) + "," + to_string(s.rx) + ")"; }

void validate_state(const Network& net, const State& s) {
  const auto all = net.all_nodes();
  if (!(s.tx - all).empty() || !(s.rx - all).empty())
    throw ValidationError("state " + to_string(s) + ": node id out of range");
  if (!(s.tx & s.rx).empty()) throw ValidationError("state " + to_string(s) + ": node both transmits and receives");
  if (s.rx.contains(net.source())) throw ValidationError("state " + to_string(s) + ": source cannot receive");
  if (s.tx.contains(net.sink())) throw ValidationError("state " + to_string(s) + ": sink cannot transmit");
}

State prune(const Network& net, State s) {
  for (;;) {
    NodeSet heard{}, talking{};
    for (auto i : s.tx.members()) heard = heard | (net.neighbors(i) & s.rx);
    for (auto j : heard.members()) talking = talking | (net.neighbors(j) & s.tx);
    if (heard == s.rx && talking == s.tx) return s;
    s = State{talking, heard};
  }
}

namespace {

void canonicalize(std::vector<State>& states) {
  std::sort(states.begin(), states.end(), canonical_less);
  states.erase(std::unique(states.begin(), states.end()), states.end());
}

}  // namespace

std::vector<State> enumerate_states(const Network& net, std::optional<int> max_tx, bool do_prune) {
  const int m = net.node_count();
  if (m > 16) throw ValidationError("state enumeration is limited to 16 nodes");
  const std::uint32_t all = net.all_nodes().bits();
  const std::uint32_t can_tx = all & ~(1u << net.sink().index());
  const std::uint32_t can_rx = all & ~(1u << net.source().index());
  std::vector<State> out;
  // Enumerate transmitter sets, then receiver sets among the remaining nodes.
  for (std::uint32_t tx = can_tx;; tx = (tx - 1) & can_tx) {
    if (!max_tx || std::popcount(tx) <= *max_tx) {
      const std::uint32_t free = can_rx & ~tx;
      for (std::uint32_t rx = free;; rx = (rx - 1) & free) {
        State s{NodeSet(tx), NodeSet(rx)};
        if (do_prune) {
          s = prune(net, s);
          if (!s.tx.empty()) out.push_back(s);
        } else {
          out.push_back(s);
        }
        if (rx == 0) break;
      }
    }
    if (tx == 0) break;
  }
  if (do_prune) {
    canonicalize(out);
  } else {
    std::sort(out.begin(), out.end(), canonical_less);
  }
  return out;
}

std::vector<State> ia_states(const Network& net) { return enumerate_states(net, 1, true); }

std::vector<State> mdf_states(const Network& net) {
  auto all = enumerate_states(net, 3, true);
  std::erase_if(all, [&](const State& s) {
    return s.tx.size() == 3 && !(s.tx.contains(net.source()) && s.rx.contains(net.sink()));
  });
  return all;
}

namespace {

bool has_edge(const Network& net, NodeId a, NodeId b) {
  auto [u, v] = std::minmax(a, b);
  return std::any_of(net.edges().begin(), net.edges().end(),
                     [&](const Edge& e) { return e.u == u && e.v == v; });
}

std::string path_text(const std::vector<NodeId>& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "-" : "") + std::to_string(p[i].value);
  return out;
}

}  // namespace

std::vector<State> path_schedule(const Network& net, const std::vector<std::vector<NodeId>>& paths,
                                 std::vector<std::string>* warnings) {
  if (paths.empty()) throw ValidationError("path schedule needs at least one path");
  NodeSet used{};
  std::size_t longest = 0;
  for (const auto& p : paths) {
    const auto label = "path " + path_text(p);
    if (p.size() < 2) throw ValidationError(label + ": needs at least two nodes");
    if (p.front() != net.source() || p.back() != net.sink())
      throw ValidationError(label + ": must start at the source and end at the sink");
    for (auto n : p)
      if (n.value < 1 || n.value > net.node_count()) throw ValidationError(label + ": node id out of range");
    for (std::size_t h = 0; h + 1 < p.size(); ++h)
      if (!has_edge(net, p[h], p[h + 1]))
        throw ValidationError(label + ": no edge " + std::to_string(p[h].value) + "-" +
                              std::to_string(p[h + 1].value));
    for (std::size_t h = 1; h + 1 < p.size(); ++h) {
      if (used.contains(p[h])) throw ValidationError(label + ": paths overlap at node " + std::to_string(p[h].value));
      used.insert(p[h]);
    }
    longest = std::max(longest, p.size() - 1);
  }

  std::vector<State> out;
  for (std::size_t r = 0; r < longest; ++r) {
    State s;
    for (std::size_t q = 0; q < paths.size(); ++q) {
      const auto hops = paths[q].size() - 1;
      const std::size_t hop = (r + longest * paths.size() - q) % longest;
      if (hop >= hops) continue;
      s.tx.insert(paths[q][hop]);
      s.rx.insert(paths[q][hop + 1]);
    }
    if (s.tx.empty()) continue;
    if (warnings && !(s.tx.contains(net.source()) && s.rx.contains(net.sink())))
      warnings->push_back("scheduled state " + to_string(s) + " does not have the source transmitting and the sink receiving");
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

std::vector<std::vector<NodeId>> parse_paths(std::string_view text) {
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> cur;
  std::size_t pos = 0;
  auto fail = [&] { throw ParseError("paths", "expected dash-separated node ids, comma between paths"); };
  while (pos <= text.size()) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
    if (ec != std::errc{}) fail();
    cur.push_back(NodeId{v});
    pos = static_cast<std::size_t>(ptr - text.data());
    if (pos == text.size()) break;
    if (text[pos] == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (text[pos] != '-') {
      fail();
    }
    ++pos;
  }
  out.push_back(std::move(cur));
  return out;
}

StateView::StateView(const Network& net, const State& s) : state_(s) {
  for (auto i : s.tx.members()) {
    auto& rs = receivers_[i.index()];
    rs = (net.neighbors(i) & s.rx).members();
    std::stable_sort(rs.begin(), rs.end(), [&](NodeId a, NodeId b) { return net.gain(i, a) > net.gain(i, b); });
  }
  for (auto j : s.rx.members()) transmitters_[j.index()] = (net.neighbors(j) & s.tx).members();
}

int StateView::rank(NodeId i, NodeId j) const {
  const auto& rs = receivers(i);
  auto it = std::find(rs.begin(), rs.end(), j);
  return it == rs.end() ? 0 : static_cast<int>(it - rs.begin()) + 1;
}

std::vector<State> scheme_states(const Network& net, const StateSelection& sel,
                                 std::vector<std::string>* warnings) {
  auto out = ia_states(net);
  switch (sel.source) {
    case StateSource::IaOnly:
      break;
    case StateSource::Auto: {
      if (sel.max_tx) {
        auto more = enumerate_states(net, sel.max_tx, true);
        out.insert(out.end(), more.begin(), more.end());
        break;
      }
      if (net.node_count() > kFullEnumerationLimit)
        throw ValidationError("networks with more than " + std::to_string(kFullEnumerationLimit) +
                              " nodes need --paths or --states");
      auto more = mdf_states(net);
      out.insert(out.end(), more.begin(), more.end());
      break;
    }
    case StateSource::File:
      for (const auto& s : sel.listed) validate_state(net, s);
      out.insert(out.end(), sel.listed.begin(), sel.listed.end());
      break;
    case StateSource::Paths: {
      auto more = path_schedule(net, sel.paths, warnings);
      out.insert(out.end(), more.begin(), more.end());
      break;
    }
  }
  canonicalize(out);
  return out;
}

BoundStates bound_states(const Network& net, const StateSelection& sel) {
  if (net.node_count() <= kFullEnumerationLimit) return {enumerate_states(net, std::nullopt, false), false};
  auto s = scheme_states(net, sel);
  return {std::move(s), true};
}

std::vector<State> parse_states(std::string_view text, const Network& net) {
  using json = nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array())
    throw ParseError("states", "expected an object with a 'states' list");
  std::vector<State> out;
  const auto& list = doc["states"];
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string path = "states[" + std::to_string(k) + "]";
    const auto& js = list[k];
    if (!js.is_object()) throw ParseError(path, "expected an object");
    State s;
    for (const char* key : {"tx", "rx"}) {
      if (!js.contains(key) || !js[key].is_array()) throw ParseError(path + "." + key, "expected a list of node ids");
      for (std::size_t n = 0; n < js[key].size(); ++n) {
        const auto& v = js[key][n];
        const auto field = path + "." + key + "[" + std::to_string(n) + "]";
        if (!v.is_number_integer()) throw ParseError(field, "expected an integer");
        int id = v.get<int>();
        if (id < 1 || id > net.node_count()) throw ParseError(field, "node id out of range");
        (key[0] == 't' ? s.tx : s.rx).insert(NodeId{id});
      }
    }
    for (auto it = js.begin(); it != js.end(); ++it)
      if (it.key() != "tx" && it.key() != "rx") throw ParseError(path + "." + it.key(), "unknown field");
    try {
      validate_state(net, s);
    } catch (const ValidationError& e) {
      throw ParseError(path, e.what());
    }
    out.push_back(s);
  }
  return out;
}

std::string serialize_states(const std::vector<State>& states) {
  std::ostringstream out;
  auto list = [](NodeSet s) {
    std::string t = "[";
    bool first = true;
    for (auto n : s.members()) {
      t += (first ? "" : ", ") + std::to_string(n.value);
      first = false;
    }
    return t + "]";
  };
  out << "{\n  \"states\": [";
  for (std::size_t k = 0; k < states.size(); ++k)
    out << (k ? ",\n" : "\n") << "    {\"rx\": " << list(states[k].rx) << ", \"tx\": " << list(states[k].tx) << "}";
  out << (states.empty() ? "]" : "\n  ]") << "\n}\n";
  return out.str();
}

}  // namespace hdrelay
