#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hdrelay/analysis.hpp"

namespace {

using namespace hdrelay;

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct CommonArgs {
  std::string network;
  std::vector<std::string> sets;
  std::string states = "auto";
  std::string paths;
  std::optional<int> max_tx;
  std::string broadcast = "best-user";
  std::string mimo = "equal";
  std::string dpc_interference = "reject";
  std::uint64_t seed = 1;
  int starts = 20;
  unsigned threads = 0;
};

void add_network(CLI::App& cmd, CommonArgs& a) {
  cmd.add_option("network", a.network, "Network file, or a built-in name")->required();
  cmd.add_option("--set", a.sets, "Rebind a gain class, e.g. --set beta=10")->take_all();
}

void add_state_options(CLI::App& cmd, CommonArgs& a) {
  cmd.add_option("--states", a.states, "auto, ia, or a state-list JSON file")->capture_default_str();
  cmd.add_option("--paths", a.paths, "Schedule along node-disjoint paths, e.g. 2-4-7-11,2-5-8-11");
  cmd.add_option("--max-tx", a.max_tx, "Largest transmitter set in enumerated states")->check(CLI::PositiveNumber);
}

void add_solver_options(CLI::App& cmd, CommonArgs& a) {
  cmd.add_option("--broadcast", a.broadcast, "Broadcast cut rule")
      ->check(CLI::IsMember({"best-user", "simo-coop"}))
      ->capture_default_str();
  cmd.add_option("--mimo", a.mimo, "MIMO cut input covariance")
      ->check(CLI::IsMember({"equal", "coop"}))
      ->capture_default_str();
  cmd.add_option("--dpc-source-interference", a.dpc_interference,
                 "How receivers other than the dirty-paper target treat the source signal")
      ->check(CLI::IsMember({"reject", "noise"}))
      ->capture_default_str();
  cmd.add_option("--seed", a.seed, "Seed of the superposition search")->capture_default_str();
  cmd.add_option("--starts", a.starts, "Superposition search starts")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--threads", a.threads, "Worker threads, 0 for all cores")->capture_default_str();
}

Network load(const CommonArgs& a) {
  auto net = load_network(a.network);
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects class=value, got '" + s + "'");
    const auto name = s.substr(0, eq);
    if (!net.classes().contains(name)) throw ValidationError("network has no gain class '" + name + "'");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(s.substr(eq + 1), &used);
      if (used != s.size() - eq - 1) throw std::invalid_argument("trailing text");
    } catch (const std::logic_error&) {
      throw ValidationError("--set " + name + ": '" + s.substr(eq + 1) + "' is not a number");
    }
    net = net.with_class(name, value);
  }
  for (const auto& w : net.warnings()) spdlog::warn("{}", w);
  return net;
}

AnalysisOptions options(const CommonArgs& a, const Network& net) {
  AnalysisOptions opt;
  if (!a.paths.empty()) {
    opt.states.source = StateSource::Paths;
    opt.states.paths = parse_paths(a.paths);
  } else if (a.states == "ia") {
    opt.states.source = StateSource::IaOnly;
  } else if (a.states != "auto") {
    opt.states.source = StateSource::File;
    opt.states.listed = parse_states(read_text_file(a.states), net);
  }
  opt.states.max_tx = a.max_tx;
  opt.cut.broadcast = a.broadcast == "simo-coop" ? BroadcastRule::SimoCoop : BroadcastRule::BestUser;
  opt.cut.mimo = a.mimo == "coop" ? MimoRule::Cooperative : MimoRule::EqualPower;
  opt.flow.dpc = a.dpc_interference == "noise" ? DpcInterference::Noise : DpcInterference::Reject;
  opt.sc.seed = a.seed;
  opt.sc.starts = a.starts;
  opt.sc.threads = a.threads;
  return opt;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("hdrelay");
  logger->set_pattern("%^%l%$: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("HDRELAY_LOG")) spdlog::cfg::helpers::load_levels(env);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Achievable rates and cut-set bounds of half-duplex Gaussian relay networks"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* net_cmd = app.add_subcommand("net", "Network file utilities");
  net_cmd->require_subcommand(1);
  auto* validate_cmd = net_cmd->add_subcommand("validate", "Parse a network and print it normalized");
  add_network(*validate_cmd, args);

  auto* states_cmd = app.add_subcommand("states", "State enumeration");
  states_cmd->require_subcommand(1);
  auto* enum_cmd = states_cmd->add_subcommand("enum", "List the states a scheme would schedule");
  add_network(*enum_cmd, args);
  add_state_options(*enum_cmd, args);
  bool all_states = false;
  enum_cmd->add_flag("--all", all_states, "Every role-constrained state, without pruning");

  auto* bound_cmd = app.add_subcommand("bound", "Cut-set upper bound");
  add_network(*bound_cmd, args);
  add_state_options(*bound_cmd, args);
  add_solver_options(*bound_cmd, args);
  std::string table_path;
  bound_cmd->add_option("--dump-table", table_path, "Write the cut-by-state capacity table as CSV");

  std::string scheme = "cb";
  auto* rate_cmd = app.add_subcommand("rate", "Optimal rate of one scheme");
  add_network(*rate_cmd, args);
  add_state_options(*rate_cmd, args);
  add_solver_options(*rate_cmd, args);
  std::string dump_path;
  rate_cmd->add_option("--dump-regions", dump_path, "Write the region rows of the active states as CSV");
  rate_cmd->add_option("--scheme", scheme, "ia, cb, sc or dpc")
      ->check(CLI::IsMember({"ia", "cb", "sc", "dpc"}))
      ->capture_default_str();

  std::string param, columns = "ia,cb,sc,dpc,bound", out_path;
  double from = 0.0, to = 0.0;
  int points = 25;
  bool log_spacing = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one gain class and write CSV");
  add_network(*sweep_cmd, args);
  add_state_options(*sweep_cmd, args);
  add_solver_options(*sweep_cmd, args);
  sweep_cmd->add_option("--param", param, "Gain class to vary")->required();
  sweep_cmd->add_option("--from", from, "First value")->required();
  sweep_cmd->add_option("--to", to, "Last value")->required();
  sweep_cmd->add_option("--points", points, "Number of points")->capture_default_str();
  sweep_cmd->add_flag("--log", log_spacing, "Logarithmic spacing");
  sweep_cmd->add_option("--scheme", columns, "Columns to compute")->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    const auto net = load(args);
    if (*validate_cmd) {
      std::cout << serialize(net);
    } else if (*enum_cmd) {
      std::vector<State> states;
      if (all_states) {
        states = enumerate_states(net, args.max_tx, false);
      } else {
        std::vector<std::string> warnings;
        states = scheme_states(net, options(args, net).states, &warnings);
        for (const auto& w : warnings) spdlog::warn("{}", w);
      }
      std::cout << states.size() << " states\n";
      for (const auto& s : states) std::cout << to_string(s) << '\n';
    } else if (*bound_cmd) {
      const auto bound = compute_bound(net, options(args, net));
      write_bound_report(std::cout, net, bound);
      if (!table_path.empty()) {
        std::ofstream table(table_path);
        if (!table) throw ValidationError("cannot write " + table_path);
        write_capacity_table_csv(table, bound.table);
      }
    } else if (*rate_cmd) {
      const auto report = compute_rate(net, parse_scheme(scheme), options(args, net));
      for (const auto& w : report.warnings) spdlog::warn("{}", w);
      write_rate_report(std::cout, report);
      if (!dump_path.empty()) {
        std::ofstream dump(dump_path);
        if (!dump) throw ValidationError("cannot write " + dump_path);
        bool header = true;
        for (auto k : report.solution.active()) {
          write_region_csv(dump, report.solution.blocks[k].region, header);
          header = false;
        }
      }
    } else if (*sweep_cmd) {
      SweepSpec spec;
      spec.parameter = param;
      spec.from = from;
      spec.to = to;
      spec.points = points;
      spec.spacing = log_spacing ? Spacing::Log : Spacing::Linear;
      spec.quantities = parse_quantity_list(columns);
      spec.options = options(args, net);
      spec.seed = args.seed;
      spec.threads = args.threads;
      validate(spec, net);
      if (out_path.empty()) {
        run_sweep(net, spec, std::cout);
      } else {
        std::ofstream out(out_path);
        if (!out) throw ValidationError("cannot write " + out_path);
        run_sweep(net, spec, out);
      }
    }
  } catch (const SolverError& e) {
    spdlog::error("{}", e.what());
    return kExitSolver;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  return 0;
}
