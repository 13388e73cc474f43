#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nlspec/cli.hpp"
#include "nlspec/error.hpp"

using namespace nlspec;
using namespace nlspec::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("nlspec_unit_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("format_number round-trips 17 significant digits") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> e(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::pow(10.0, e(rng)) * (i % 2 ? -1 : 1);
    CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("config defaults and resolution") {
  const auto c = parse_config(json::parse(R"({"command": "power", "functional": {"kind": "quadratic_form"},
                                             "domain": {"grid": {"width": 6}}, "power": {"rule": "constant", "c": 0.5}})"));
  CHECK(c.command == Command::power);
  CHECK(c.functional.kind() == FunctionalKind::quadratic_form);
  CHECK(c.functional.dimension() == 6);
  CHECK(c.power.power.rule == StepRule::constant);
  CHECK(c.power.power.c == 0.5);
  CHECK(c.seed_source == "default");

  const auto s = parse_config(json::parse(R"({"command": "flow", "functional": {"kind": "graph_tv"},
                                             "domain": {"grid": {"width": 4}}, "input": {"values": [1, 0, 0, 1]}, "seed": 3})"),
                              ".", 9);
  CHECK(s.seed == 9);
  CHECK(s.seed_source == "NLSPEC_SEED");
  CHECK(s.has_input);
  CHECK(s.input == Signal{1, 0, 0, 1});
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error(json::parse(R"({"command": "flow", "functional": {"kind": "graph_tv", "weight": 2},
                                    "domain": {"grid": {"width": 4}}, "input": {"values": [1, 0, 0, 1]}})"))
            .find("functional.weight") != std::string::npos);
  CHECK(config_error(json::parse(R"({"command": "flow", "functional": {"kind": "graph_tv"},
                                    "domain": {"grid": {"width": 4}}, "input": {"values": [1, 0, 1]}})"))
            .find("input") != std::string::npos);
  CHECK(config_error(json::parse(R"({"command": "flow", "functional": {"kind": "dirichlet_p", "p": 0.5},
                                    "domain": {"grid": {"width": 4}}, "input": {"values": [1, 0, 0, 1]}})"))
            .find("functional") != std::string::npos);
  CHECK(config_error(json::parse(R"({"command": "power", "functional": {"kind": "graph_tv"},
                                    "domain": {"grid": {"width": 4}}, "flow": {"tau": 0.1}})"))
            .find("flow") != std::string::npos);
  CHECK(config_error(json::parse(R"({"command": "dance"})")).find("command") != std::string::npos);
  CHECK_FALSE(config_error(json::parse(R"({"command": "flow", "functional": {"kind": "graph_tv"},
                                          "domain": {"grid": {"width": 4}}, "input": {"values": [1, 0, 0, 1]},
                                          "flow": {"tau": -1}})"))
                  .empty());
}

TEST_CASE("input files resolve against the config directory") {
  const auto dir = scratch("input");
  write(dir / "f.txt", "0 1.5\n1 -2\n2 0.25\n");
  write(dir / "c.json", R"({"command": "flow", "functional": {"kind": "l1"}, "domain": {"size": 3},
                            "input": {"file": "f.txt"}})");
  const auto c = load_config(dir / "c.json");
  CHECK(c.input == Signal{1.5, -2, 0.25});
}

TEST_CASE("compare_traces") {
  const auto dir = scratch("compare");
  write(dir / "a.csv", "k,x,y\n0,1,nan\n1,2,3\n");
  write(dir / "b.csv", "k,x,y\n0,1,nan\n1,2.001,3\n");
  write(dir / "c.csv", "k,x\n0,1\n1,2\n");
  write(dir / "d.csv", "k,x,y\n0,1,nan\n");

  auto rep = compare_traces(dir / "a.csv", dir / "a.csv", {});
  CHECK(rep.passed);

  rep = compare_traces(dir / "a.csv", dir / "b.csv", {});
  CHECK_FALSE(rep.passed);
  REQUIRE(rep.failures.size() == 1);
  CHECK(rep.failures[0].rfind("row 2 column x", 0) == 0);
  CHECK(rep.columns[1].worst_row == 2);

  write(dir / "tol.txt", "# loose on x\nx 1e-2\n* 0\n");
  CHECK(compare_traces(dir / "a.csv", dir / "b.csv", load_tolerances(dir / "tol.txt")).passed);

  CHECK_THROWS_AS(compare_traces(dir / "a.csv", dir / "c.csv", {}), SchemaMismatch);
  CHECK_THROWS_AS(compare_traces(dir / "a.csv", dir / "d.csv", {}), SchemaMismatch);
  Tolerances unknown;
  unknown.columns["z"] = 1.0;
  CHECK_THROWS_AS(compare_traces(dir / "a.csv", dir / "a.csv", unknown), SchemaMismatch);
  write(dir / "bad.txt", "x one\n");
  CHECK_THROWS_AS(load_tolerances(dir / "bad.txt"), ConfigError);
}

TEST_CASE("run_experiment writes the manifest and trace") {
  const auto dir = scratch("run");
  const auto c = parse_config(json::parse(R"({"command": "flow", "functional": {"kind": "graph_tv"},
                                             "domain": {"grid": {"width": 4}}, "input": {"values": [1, 1, -1, -1]}})"));
  RunOptions ro;
  ro.output_dir = dir;
  std::ostringstream log;
  CHECK(run_experiment(c, ro, log) == 0);
  std::ifstream in(dir / "manifest.json");
  const json m = json::parse(in);
  CHECK(m["command"] == "flow");
  CHECK(m["version"] == std::string(library_version));
  CHECK(m["not_converged"] == false);
  CHECK(std::filesystem::exists(dir / "trace.csv"));
  CHECK(std::filesystem::exists(dir / "signals" / "u_last.txt"));
}

TEST_CASE("write_signal image scaling") {
  const auto dir = scratch("pgm");
  WeightedGraph g(4, {{0, 1}, {2, 3}, {0, 2}, {1, 3}});
  g.set_layout({2, 2});
  bool image = false;
  const auto [lo, hi] = write_signal(dir / "s", Signal{0, 1, 2, 4}, &g, &image);
  CHECK(image);
  CHECK(lo == 0.0);
  CHECK(hi == 4.0);
  std::ifstream in(dir / "s.pgm");
  std::string magic, tok;
  in >> magic;
  CHECK(magic == "P2");
  std::vector<std::string> tokens;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::getline(in, tok);
      continue;
    }
    tokens.push_back(tok);
  }
  REQUIRE(tokens.size() == 7);
  CHECK(tokens[2] == "65535");
  CHECK(tokens[3] == "0");
  CHECK(tokens[4] == "16384");
  CHECK(tokens[6] == "65535");
}
