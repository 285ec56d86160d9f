#include "hdrelay/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace hdrelay {

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::IA: return "ia";
    case Quantity::CB: return "cb";
    case Quantity::SC: return "sc";
    case Quantity::DPC: return "dpc";
    case Quantity::Bound: return "bound";
  }
  return "?";
}

Quantity parse_quantity(const std::string& text) {
  if (text == "bound") return Quantity::Bound;
  switch (parse_scheme(text)) {
    case Scheme::IA: return Quantity::IA;
    case Scheme::CB: return Quantity::CB;
    case Scheme::SC: return Quantity::SC;
    case Scheme::DPC: return Quantity::DPC;
  }
  return Quantity::Bound;
}

std::vector<Quantity> parse_quantity_list(std::string_view text) {
  std::vector<Quantity> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    const auto item = std::string(text.substr(pos, comma - pos));
    if (item.empty()) throw ValidationError("empty entry in column list '" + std::string(text) + "'");
    const auto q = parse_quantity(item);
    if (std::find(out.begin(), out.end(), q) != out.end()) throw ValidationError("column '" + item + "' listed twice");
    out.push_back(q);
    pos = comma + 1;
  }
  return out;
}

RateReport compute_rate(const Network& net, Scheme scheme, const AnalysisOptions& opt) {
  RateReport r;
  r.states = scheme_states(net, opt.states, &r.warnings);
  r.solution = solve_scheme(net, r.states, scheme, opt.flow, opt.sc);
  return r;
}

BoundResult compute_bound(const Network& net, const AnalysisOptions& opt) {
  auto bs = bound_states(net, opt.states);
  auto res = cutset_bound(net, bs.states, opt.cut, opt.flow.lp);
  res.relative = bs.relative;
  return res;
}

double evaluate(const Network& net, Quantity q, const AnalysisOptions& opt) {
  switch (q) {
    case Quantity::Bound: return compute_bound(net, opt).rate;
    case Quantity::IA: return compute_rate(net, Scheme::IA, opt).solution.rate;
    case Quantity::CB: return compute_rate(net, Scheme::CB, opt).solution.rate;
    case Quantity::SC: return compute_rate(net, Scheme::SC, opt).solution.rate;
    case Quantity::DPC: return compute_rate(net, Scheme::DPC, opt).solution.rate;
  }
  return 0.0;
}

void validate(const SweepSpec& spec, const Network& net) {
  if (!net.classes().contains(spec.parameter))
    throw ValidationError("network has no gain class '" + spec.parameter + "'");
  if (spec.points < 2) throw ValidationError("a sweep needs at least 2 points");
  if (!std::isfinite(spec.from) || !std::isfinite(spec.to)) throw ValidationError("sweep range must be finite");
  if (spec.spacing == Spacing::Log && (spec.from <= 0.0 || spec.to <= 0.0))
    throw ValidationError("log spacing needs a positive range");
  if (spec.quantities.empty()) throw ValidationError("no columns requested");
}

std::vector<double> sweep_values(const SweepSpec& spec) {
  std::vector<double> out;
  const int n = spec.points;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    double v;
    if (spec.from == spec.to) v = spec.from;
    else if (spec.spacing == Spacing::Log) v = spec.from * std::pow(spec.to / spec.from, t);
    else v = spec.from + (spec.to - spec.from) * t;
    if (i == n - 1) v = spec.to;
    out.push_back(v);
  }
  return out;
}

std::string format_number(double v) { return fmt::format("{:.9g}", v); }

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::vector<SweepRow> run_sweep(const Network& net, const SweepSpec& spec, std::ostream& csv) {
  validate(spec, net);
  const auto values = sweep_values(spec);
  const std::size_t n = values.size();
  std::vector<std::optional<SweepRow>> rows(n);
  std::vector<std::exception_ptr> errors(n);

  const unsigned threads = std::min<unsigned>(
      spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency()), static_cast<unsigned>(n));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        auto opt = spec.options;
        opt.sc.seed = spec.seed + i;
        if (threads > 1) opt.sc.threads = 1;
        const auto point = net.with_class(spec.parameter, values[i]);
        SweepRow row{values[i], {}};
        for (auto q : spec.quantities) row.values.push_back(evaluate(point, q, opt));
        spdlog::info("{} = {}: done", spec.parameter, format_number(values[i]));
        rows[i] = std::move(row);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  csv << "param";
  for (auto q : spec.quantities) csv << ',' << to_string(q);
  csv << '\n';
  std::vector<SweepRow> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      std::string what = "unknown failure";
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      csv << "error," << csv_quote(spec.parameter + " = " + format_number(values[i]) + ": " + what) << '\n';
      csv.flush();
      std::rethrow_exception(errors[i]);
    }
    csv << format_number(rows[i]->parameter);
    for (double v : rows[i]->values) csv << ',' << format_number(v);
    csv << '\n';
    out.push_back(std::move(*rows[i]));
  }
  csv.flush();
  return out;
}

namespace {

std::string link_text(const Link& l) { return fmt::format("{}->{}", l.from.value, l.to.value); }

}  // namespace

void write_bound_report(std::ostream& out, const Network& net, const BoundResult& bound) {
  const auto& table = bound.table;
  out << fmt::format("bound {}\n", format_number(bound.rate));
  out << fmt::format("states {}{}\n", table.states.size(),
                     bound.relative ? " (relative to the scheduled state set)" : "");
  out << "active states:\n";
  for (std::size_t k = 0; k < table.states.size(); ++k)
    if (bound.lambda[k] > 1e-9)
      out << fmt::format("  {:<24} lambda {}\n", to_string(table.states[k]), format_number(bound.lambda[k]));
  out << "cuts:\n";
  for (std::size_t c = 0; c < table.cuts.size(); ++c) {
    const auto& omega = table.cuts[c].omega;
    std::string tag = omega == NodeSet{net.source().value} ? " source" : "";
    if (omega == net.all_nodes() - NodeSet{net.sink().value}) tag = " sink";
    out << fmt::format("  {:<24} {}{}{}\n", to_string(omega), format_number(bound.cut_values[c]),
                       bound.binding[c] ? " binding" : "", tag);
  }
}

void write_rate_report(std::ostream& out, const RateReport& rate) {
  const auto& sol = rate.solution;
  out << fmt::format("scheme {}\n", to_string(sol.scheme));
  out << fmt::format("rate {}\n", format_number(sol.rate));
  out << fmt::format("states {}\n", rate.states.size());
  if (sol.scheme == Scheme::SC)
    out << fmt::format("search best of {} starts (start {}, {} skipped)\n", sol.starts, sol.best_start,
                       sol.skipped_starts);
  out << "active states:\n";
  for (auto k : sol.active()) {
    const auto& b = sol.blocks[k];
    std::string extra;
    if (b.region.dpc_receiver) extra = fmt::format(" dpc towards {}", b.region.dpc_receiver->value);
    out << fmt::format("  {:<24} lambda {}{}\n", to_string(b.region.state), format_number(b.lambda), extra);
    for (std::size_t l = 0; l < b.region.links.size(); ++l)
      if (b.link_flow[l] > 1e-12)
        out << fmt::format("    flow {} {}\n", link_text(b.region.links[l]), format_number(b.link_flow[l]));
    if (b.split) {
      for (const auto& [key, alpha] : b.split->entries())
        out << fmt::format("    alpha {}->{} {}\n", key.first, key.second, format_number(alpha));
    }
  }
}

}  // namespace hdrelay
