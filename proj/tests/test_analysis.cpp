#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "hdrelay/analysis.hpp"

using namespace hdrelay;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

SweepSpec line_sweep() {
  SweepSpec spec;
  spec.parameter = "hop";
  spec.from = 0.5;
  spec.to = 2.0;
  spec.points = 4;
  spec.quantities = {Quantity::IA, Quantity::CB, Quantity::Bound};
  return spec;
}

Network line_with_class() {
  return parse_network(R"({"nodes": 3, "source": 1, "sink": 3, "power": 3, "noise": 1,
                           "classes": {"hop": 1},
                           "edges": [{"u": 1, "v": 2, "gain": 1}, {"u": 2, "v": 3, "class": "hop"}]})");
}

}  // namespace

TEST_CASE("column lists") {
  CHECK(parse_quantity_list("ia,cb,bound") == std::vector<Quantity>{Quantity::IA, Quantity::CB, Quantity::Bound});
  CHECK(parse_quantity_list("sc") == std::vector<Quantity>{Quantity::SC});
  CHECK_THROWS_AS(parse_quantity_list("ia,,cb"), ValidationError);
  CHECK_THROWS_AS(parse_quantity_list("ia,ia"), ValidationError);
  CHECK_THROWS_AS(parse_quantity_list("ia,mdf"), ValidationError);
  CHECK_THROWS_AS(parse_quantity_list(""), ValidationError);
  CHECK(std::string(to_string(Quantity::DPC)) == "dpc");
}

TEST_CASE("sweep points") {
  SweepSpec spec;
  spec.from = 0.1;
  spec.to = 10.0;
  spec.points = 3;
  spec.spacing = Spacing::Log;
  const auto log = sweep_values(spec);
  REQUIRE(log.size() == 3);
  CHECK(log[0] == 0.1);
  CHECK(log[1] == doctest::Approx(1.0));
  CHECK(log[2] == 10.0);

  spec.spacing = Spacing::Linear;
  spec.from = 1.0;
  spec.to = 2.0;
  spec.points = 5;
  CHECK(sweep_values(spec) == std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0});

  spec.to = 1.0;
  spec.points = 2;
  CHECK(sweep_values(spec) == std::vector<double>{1.0, 1.0});
}

TEST_CASE("sweep validation") {
  const auto net = line_with_class();
  auto spec = line_sweep();
  CHECK_NOTHROW(validate(spec, net));
  spec.parameter = "nope";
  CHECK_THROWS_AS(validate(spec, net), ValidationError);
  spec = line_sweep();
  spec.points = 1;
  CHECK_THROWS_AS(validate(spec, net), ValidationError);
  spec = line_sweep();
  spec.spacing = Spacing::Log;
  spec.from = 0.0;
  CHECK_THROWS_AS(validate(spec, net), ValidationError);
  spec = line_sweep();
  spec.quantities.clear();
  CHECK_THROWS_AS(validate(spec, net), ValidationError);
}

TEST_CASE("sweep CSV") {
  const auto net = line_with_class();
  std::ostringstream csv;
  const auto rows = run_sweep(net, line_sweep(), csv);
  const auto text = lines(csv.str());
  REQUIRE(text.size() == 5);
  CHECK(text[0] == "param,ia,cb,bound");
  CHECK(text[1].rfind("0.5,", 0) == 0);
  CHECK(text[4] == "2,0.649149873,0.649149873,0.649149873");
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.values[0] <= row.values[1] + 1e-6);
    CHECK(row.values[1] <= row.values[2] + 1e-6);
  }
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(1.0) == "1");
}

TEST_CASE("repeated sweep point") {
  const auto net = load_network("diamond");
  SweepSpec spec;
  spec.parameter = "first";
  spec.from = spec.to = 0.7;
  spec.points = 2;
  std::ostringstream csv;
  run_sweep(net, spec, csv);
  const auto text = lines(csv.str());
  REQUIRE(text.size() == 3);
  CHECK(text[0] == "param,ia,cb,sc,dpc,bound");
  CHECK(text[1] == text[2]);
}

TEST_CASE("sweeps are reproducible across thread counts") {
  const auto net = load_network("twostage");
  SweepSpec spec;
  spec.parameter = "gamma";
  spec.from = 0.2;
  spec.to = 2.0;
  spec.points = 3;
  spec.spacing = Spacing::Log;
  spec.quantities = {Quantity::CB, Quantity::SC, Quantity::DPC};
  spec.options.sc.starts = 3;
  spec.threads = 1;
  std::ostringstream a, b;
  run_sweep(net, spec, a);
  spec.threads = 3;
  run_sweep(net, spec, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("failing point leaves an error row") {
  const auto net = line_with_class();
  auto spec = line_sweep();
  spec.from = 1.0;
  spec.to = -1.0;
  spec.points = 3;
  std::ostringstream csv;
  CHECK_THROWS_AS(run_sweep(net, spec, csv), ValidationError);
  const auto text = lines(csv.str());
  REQUIRE(text.size() == 4);
  CHECK(text[1].rfind("1,", 0) == 0);
  CHECK(text[2].rfind("0,", 0) == 0);
  CHECK(text[3].rfind("error,\"hop = -1: ", 0) == 0);
}

TEST_CASE("reports") {
  const auto net = load_network("twostage");
  std::ostringstream bound;
  write_bound_report(bound, net, compute_bound(net, {}));
  CHECK(bound.str().rfind("bound 1\nstates 324\n", 0) == 0);
  CHECK(bound.str().find("{1}") != std::string::npos);
  CHECK(bound.str().find("binding source") != std::string::npos);

  const auto line = load_network("line");
  AnalysisOptions opt;
  opt.states.source = StateSource::IaOnly;
  std::ostringstream rate;
  write_rate_report(rate, compute_rate(line, Scheme::IA, opt));
  CHECK(rate.str().rfind("scheme ia\nrate 0.5\nstates 2\n", 0) == 0);
  CHECK(rate.str().find("flow 1->2 0.5") != std::string::npos);

  const auto grid = load_network("grid4x3");
  AnalysisOptions paths;
  paths.states.source = StateSource::Paths;
  paths.states.paths = parse_paths("2-4-7-11,2-5-8-11,2-6-9-11");
  const auto relative = compute_bound(grid, paths);
  CHECK(relative.relative);
  std::ostringstream rel;
  write_bound_report(rel, grid, relative);
  CHECK(rel.str().find("relative") != std::string::npos);
}
