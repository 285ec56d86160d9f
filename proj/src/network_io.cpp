#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "builtin_networks.hpp"
#include "hdrelay/network.hpp"

namespace hdrelay {

using json = nlohmann::json;

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path.empty() ? key : path + "." + key, "missing required field");
  return *it;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  auto v = j.get<long long>();
  if (v < -1'000'000 || v > 1'000'000) throw ParseError(path, "integer out of range");
  return static_cast<int>(v);
}

double as_real(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}

}  // namespace

Network parse_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("", "top level must be an object");
  check_keys(doc, {"nodes", "source", "sink", "power", "noise", "classes", "edges"}, "");

  int nodes = as_int(require(doc, "nodes", ""), "nodes");
  NodeId source{as_int(require(doc, "source", ""), "source")};
  NodeId sink{as_int(require(doc, "sink", ""), "sink")};
  double power = doc.contains("power") ? as_real(doc["power"], "power") : 3.0;
  double noise = doc.contains("noise") ? as_real(doc["noise"], "noise") : 1.0;

  std::map<std::string, double> classes;
  if (doc.contains("classes")) {
    const auto& c = doc["classes"];
    if (!c.is_object()) throw ParseError("classes", "expected an object of name: gain");
    for (auto it = c.begin(); it != c.end(); ++it) classes[it.key()] = as_real(it.value(), "classes." + it.key());
  }

  const auto& jedges = require(doc, "edges", "");
  if (!jedges.is_array()) throw ParseError("edges", "expected a list");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < jedges.size(); ++i) {
    const std::string path = "edges[" + std::to_string(i) + "]";
    const auto& je = jedges[i];
    if (!je.is_object()) throw ParseError(path, "expected an object");
    check_keys(je, {"u", "v", "gain", "class"}, path);
    Edge e;
    e.u = NodeId{as_int(require(je, "u", path), path + ".u")};
    e.v = NodeId{as_int(require(je, "v", path), path + ".v")};
    const bool has_gain = je.contains("gain"), has_class = je.contains("class");
    if (has_gain == has_class) throw ParseError(path, "exactly one of 'gain' or 'class' is required");
    if (has_gain) {
      e.gain = as_real(je["gain"], path + ".gain");
    } else {
      if (!je["class"].is_string()) throw ParseError(path + ".class", "expected a class name");
      e.gain = je["class"].get<std::string>();
    }
    edges.push_back(std::move(e));
  }
  try {
    return Network(nodes, source, sink, power, noise, std::move(classes), std::move(edges));
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    auto colon = msg.find(": ");
    if (colon == std::string::npos) throw ParseError("", msg);
    throw ParseError(msg.substr(0, colon), msg.substr(colon + 2));
  }
}

std::string serialize(const Network& net) {
  std::ostringstream out;
  out << "{\n  \"classes\": {";
  bool first = true;
  for (const auto& [name, value] : net.classes()) {
    out << (first ? "\n" : ",\n") << "    \"" << name << "\": " << fmt12(value);
    first = false;
  }
  out << (first ? "}" : "\n  }") << ",\n  \"edges\": [";
  first = true;
  for (const auto& e : net.edges()) {
    out << (first ? "\n" : ",\n") << "    {";
    if (const auto* name = std::get_if<std::string>(&e.gain)) out << "\"class\": \"" << *name << "\"";
    else out << "\"gain\": " << fmt12(std::get<double>(e.gain));
    out << ", \"u\": " << e.u.value << ", \"v\": " << e.v.value << "}";
    first = false;
  }
  out << (first ? "]" : "\n  ]") << ",\n";
  out << "  \"noise\": " << fmt12(net.noise()) << ",\n";
  out << "  \"nodes\": " << net.node_count() << ",\n";
  out << "  \"power\": " << fmt12(net.power()) << ",\n";
  out << "  \"sink\": " << net.sink().value << ",\n";
  out << "  \"source\": " << net.source().value << "\n}\n";
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> builtin_network_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::builtin_networks()) names.push_back(name);
  return names;
}

std::string builtin_network_text(const std::string& name) {
  const auto& all = detail::builtin_networks();
  auto it = all.find(name);
  if (it == all.end()) throw ValidationError("unknown built-in network '" + name + "'");
  return it->second;
}

Network load_network(const std::string& spec) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(spec)) return parse_network(read_text_file(spec));
  auto stem = fs::path(spec).stem().string();
  const auto& all = detail::builtin_networks();
  if (fs::path(spec).parent_path().empty() && all.contains(stem)) return parse_network(all.at(stem));
  throw ParseError("", "no such file or built-in network: '" + spec + "'");
}

}  // namespace hdrelay
