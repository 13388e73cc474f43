#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>

#include "nlspec/cli.hpp"
#include "nlspec/error.hpp"
#include "nlspec/grid.hpp"
#include "nlspec/oracles.hpp"

#include "internal.hpp"

namespace nlspec::cli {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

void allow(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) fail(join(where, k), "unknown key");
  }
}

bool is_index(const json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); }

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& where, const char* key, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (v->is_string() && (*v == "inf" || *v == "infinity")) return INFINITY;
  if (!v->is_number()) fail(join(where, key), "expected a number");
  const double x = v->get<double>();
  if (std::isnan(x)) fail(join(where, key), "must not be nan");
  return x;
}

std::size_t count(const json& obj, const std::string& where, const char* key, std::size_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!is_index(*v)) fail(join(where, key), "expected a non-negative integer");
  return v->get<std::size_t>();
}

std::string text(const json& obj, const std::string& where, const char* key, const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(join(where, key), "expected a string");
  return v->get<std::string>();
}

bool flag(const json& obj, const std::string& where, const char* key, bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(join(where, key), "expected true or false");
  return v->get<bool>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) fail(where, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

template <class F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(key, e.what());
  }
}

std::shared_ptr<const WeightedGraph> parse_domain(const json& d, std::vector<double>& measure, std::size_t& size) {
  allow(d, "domain", {"grid", "graph", "size", "measure"});
  const int forms = (find(d, "grid") != nullptr) + (find(d, "graph") != nullptr) + (find(d, "size") != nullptr);
  if (forms != 1) fail("domain", "give exactly one of grid, graph, size");
  if (const json* g = find(d, "grid")) {
    if (find(d, "measure")) fail("domain.measure", "grid domains carry their own measure");
    allow(*g, "domain.grid", {"width", "height", "h", "boundary"});
    GridSpec s;
    s.width = count(*g, "domain.grid", "width", 0);
    s.height = count(*g, "domain.grid", "height", 1);
    s.h = number(*g, "domain.grid", "h", 1.0);
    s.boundary_mode = wrap("domain.grid.boundary",
                           [&] { return parse_boundary_mode(text(*g, "domain.grid", "boundary", "neumann")); });
    return wrap("domain.grid", [&] { return build_grid_graph(s); });
  }
  if (const json* g = find(d, "graph")) {
    if (find(d, "measure")) fail("domain.measure", "put the measure inside domain.graph");
    allow(*g, "domain.graph", {"nodes", "edges", "boundary", "measure"});
    const std::size_t n = count(*g, "domain.graph", "nodes", 0);
    std::vector<Edge> edges;
    if (const json* e = find(*g, "edges")) {
      if (!e->is_array()) fail("domain.graph.edges", "expected an array of [i, j] or [i, j, w]");
      for (const json& x : *e) {
        if (!x.is_array() || x.size() < 2 || x.size() > 3 || !is_index(x[0]) || !is_index(x[1]) ||
            (x.size() == 3 && !x[2].is_number()))
          fail("domain.graph.edges", "expected an array of [i, j] or [i, j, w]");
        edges.push_back({x[0].get<std::size_t>(), x[1].get<std::size_t>(), x.size() == 3 ? x[2].get<double>() : 1.0});
      }
    }
    std::vector<std::size_t> boundary;
    if (const json* b = find(*g, "boundary")) {
      if (!b->is_array()) fail("domain.graph.boundary", "expected an array of node indices");
      for (const json& x : *b) {
        if (!is_index(x)) fail("domain.graph.boundary", "expected an array of node indices");
        boundary.push_back(x.get<std::size_t>());
      }
    }
    std::vector<double> m;
    if (const json* mv = find(*g, "measure")) m = numbers(*mv, "domain.graph.measure");
    return wrap("domain.graph", [&] {
      return std::make_shared<const WeightedGraph>(n, std::move(edges), std::move(boundary), std::move(m));
    });
  }
  size = count(d, "domain", "size", 0);
  if (size == 0) fail("domain.size", "must be >= 1");
  if (const json* mv = find(d, "measure")) measure = numbers(*mv, "domain.measure");
  return nullptr;
}

FunctionalHandle parse_functional(const json& f, const json& d) {
  allow(f, "functional", {"kind", "p", "matrix"});
  if (!find(f, "kind")) fail("functional.kind", "missing");
  const FunctionalKind kind = wrap("functional.kind", [&] { return parse_functional_kind(text(f, "functional", "kind", "")); });
  FunctionalParams params;
  if (find(f, "p") && kind != FunctionalKind::dirichlet_p) fail("functional.p", "only dirichlet_p takes p");
  if (kind == FunctionalKind::dirichlet_p) {
    if (!find(f, "p")) fail("functional.p", "missing");
    params.exponent = number(f, "functional", "p", 2.0);
  }
  if (const json* m = find(f, "matrix")) {
    if (kind != FunctionalKind::quadratic_form) fail("functional.matrix", "only quadratic_form takes a matrix");
    if (!m->is_array()) fail("functional.matrix", "expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (const json& r : *m) rows.push_back(numbers(r, "functional.matrix"));
    params.matrix = wrap("functional.matrix", [&] { return DenseMatrix::from_rows(rows); });
  }
  std::size_t size = 0;
  auto graph = parse_domain(d, params.node_measure, size);
  params.dimension = size;
  return wrap("functional", [&] { return make_functional(kind, graph, params); });
}

Signal read_signal_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("input.file", "cannot read " + path.string());
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> cols;
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      const double x = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') fail("input.file", "bad number '" + tok + "' in " + path.string());
      cols.push_back(x);
    }
    if (cols.size() == 2) values.push_back(cols[1]);
    else if (cols.size() == 1) values.push_back(cols[0]);
    else if (!cols.empty()) fail("input.file", "expected one or two columns per line in " + path.string());
  }
  return wrap("input.file", [&] { return Signal(std::move(values)); });
}

std::vector<std::size_t> coords(const json& in, const char* key, std::size_t dims) {
  const json* v = find(in, key);
  if (!v) fail(join("input", key), "missing");
  std::vector<std::size_t> c;
  if (is_index(*v)) c.push_back(v->get<std::size_t>());
  else if (v->is_array())
    for (const json& x : *v) {
      if (!is_index(x)) fail(join("input", key), "expected non-negative integers");
      c.push_back(x.get<std::size_t>());
    }
  else fail(join("input", key), "expected an index or an array of indices");
  if (c.size() != dims) fail(join("input", key), "expected " + std::to_string(dims) + " coordinate(s)");
  return c;
}

Signal indicator(const json& in, const FunctionalHandle& F) {
  const double value = number(in, "input", "value", 1.0);
  const WeightedGraph* g = F.graph();
  Signal s(F.dimension());
  if (g && g->layout() && g->layout()->height > 1) {
    const auto lo = coords(in, "begin", 2), hi = coords(in, "end", 2);
    const auto& L = *g->layout();
    for (std::size_t y = lo[1]; y < std::min(hi[1], L.height); ++y)
      for (std::size_t x = lo[0]; x < std::min(hi[0], L.width); ++x) s[y * L.width + x] = value;
  } else {
    const auto lo = coords(in, "begin", 1), hi = coords(in, "end", 1);
    for (std::size_t i = lo[0]; i < std::min(hi[0], s.size()); ++i) s[i] = value;
  }
  return s;
}

Signal oracle_eigenvector(const json& in, const FunctionalHandle& F) {
  const auto r = wrap("input", [&] { return detail::reduced_spectrum(F); });
  const std::size_t index = count(in, "input", "index", r.first_nonzero());
  if (index >= r.spectrum.eigenvalues.size()) fail("input.index", "exceeds the spectrum size");
  Signal s = r.embed(r.spectrum.eigenvectors[index]);
  s *= number(in, "input", "amplitude", 1.0);
  return s;
}

void parse_input(const json& in, const std::filesystem::path& base, ExperimentConfig& c) {
  if (!in.is_object()) fail("input", "expected an object");
  if (find(in, "values")) {
    allow(in, "input", {"values"});
    c.input = wrap("input.values", [&] { return Signal(numbers(in["values"], "input.values")); });
    c.input_source = "values";
  } else if (find(in, "file")) {
    allow(in, "input", {"file"});
    std::filesystem::path p = text(in, "input", "file", "");
    if (p.is_relative()) p = base / p;
    c.input = read_signal_file(p);
    c.input_source = "file";
  } else if (find(in, "generator")) {
    const std::string gen = text(in, "input", "generator", "");
    if (gen == "indicator") {
      allow(in, "input", {"generator", "begin", "end", "value"});
      c.input = indicator(in, c.functional);
    } else if (gen == "gaussian") {
      allow(in, "input", {"generator", "scale"});
      std::mt19937_64 rng(c.seed);
      std::normal_distribution<double> g(0.0, number(in, "input", "scale", 1.0));
      c.input = Signal(c.functional.dimension());
      for (double& x : c.input) x = g(rng);
    } else if (gen == "eigenvector") {
      allow(in, "input", {"generator", "index", "amplitude"});
      c.input = oracle_eigenvector(in, c.functional);
    } else {
      fail("input.generator", "unknown generator '" + gen + "' (indicator, gaussian, eigenvector)");
    }
    c.input_source = gen;
  } else {
    fail("input", "give one of values, file, generator");
  }
  if (c.input.size() != c.functional.dimension())
    fail("input", "has " + std::to_string(c.input.size()) + " values, the domain has " +
                      std::to_string(c.functional.dimension()) + " nodes");
  c.has_input = true;
}

void parse_flow(const json& f, FlowOptions& o) {
  allow(f, "flow", {"schedule", "tau", "tau_min", "max_steps", "horizon", "extinction_tol", "prox_tol", "prox_max_iter",
                    "store_iterates", "ring_size"});
  o.schedule.kind = wrap("flow.schedule", [&] { return parse_schedule_kind(text(f, "flow", "schedule", "constant")); });
  o.schedule.tau = number(f, "flow", "tau", 0.0);
  o.schedule.tau_min = number(f, "flow", "tau_min", 0.0);
  o.stop.max_steps = count(f, "flow", "max_steps", o.stop.max_steps);
  o.stop.time_horizon = number(f, "flow", "horizon", o.stop.time_horizon);
  o.stop.extinction_tol = number(f, "flow", "extinction_tol", o.stop.extinction_tol);
  o.prox_tol = number(f, "flow", "prox_tol", o.prox_tol);
  o.prox_max_iter = count(f, "flow", "prox_max_iter", o.prox_max_iter);
  o.store_iterates = flag(f, "flow", "store_iterates", o.store_iterates);
  o.ring_size = count(f, "flow", "ring_size", o.ring_size);
  if (o.schedule.tau < 0.0) fail("flow.tau", "must be >= 0 (0 selects the default)");
  if (o.schedule.tau_min < 0.0) fail("flow.tau_min", "must be >= 0");
  if (!(o.stop.time_horizon > 0.0)) fail("flow.horizon", "must be > 0");
  if (!(o.prox_tol > 0.0)) fail("flow.prox_tol", "must be > 0");
}

void parse_power(const json& p, PowerRunOptions& o) {
  allow(p, "power", {"c", "rule", "tol", "max_iter", "prox_tol", "restarts", "certificate_samples", "poincare_constant"});
  o.power.c = number(p, "power", "c", o.power.c);
  o.power.rule = wrap("power.rule", [&] { return parse_step_rule(text(p, "power", "rule", "adaptive")); });
  o.power.tol = number(p, "power", "tol", o.power.tol);
  o.power.max_iter = count(p, "power", "max_iter", o.power.max_iter);
  o.power.prox_tol = number(p, "power", "prox_tol", o.power.prox_tol);
  o.power.certificate_samples = count(p, "power", "certificate_samples", o.power.certificate_samples);
  o.restarts = count(p, "power", "restarts", o.restarts);
  if (find(p, "poincare_constant")) o.power.poincare_constant = number(p, "power", "poincare_constant", 0.0);
  if (!(o.power.c > 0.0 && o.power.c < 1.0)) fail("power.c", "must lie in (0, 1)");
  if (!(o.power.tol > 0.0)) fail("power.tol", "must be > 0");
  if (o.restarts < 1) fail("power.restarts", "must be >= 1");
}

void parse_oracle(const json& p, OracleOptions& o) {
  allow(p, "oracle", {"kind", "times", "lambda", "p"});
  const std::string k = text(p, "oracle", "kind", "spectrum");
  if (k == "spectrum") o.kind = OracleKind::spectrum;
  else if (k == "heat") o.kind = OracleKind::heat;
  else if (k == "distance") o.kind = OracleKind::distance;
  else if (k == "profile") o.kind = OracleKind::profile;
  else fail("oracle.kind", "unknown oracle '" + k + "' (spectrum, heat, distance, profile)");
  if (const json* t = find(p, "times")) o.times = numbers(*t, "oracle.times");
  for (double t : o.times)
    if (!(t >= 0.0) || !std::isfinite(t)) fail("oracle.times", "must be finite and >= 0");
  o.lambda = number(p, "oracle", "lambda", o.lambda);
  o.p = number(p, "oracle", "p", o.p);
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "flow") return Command::flow;
  if (name == "power") return Command::power;
  if (name == "decompose") return Command::decompose;
  if (name == "validate") return Command::validate;
  if (name == "oracle") return Command::oracle;
  throw ConfigError("config key 'command': unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::flow: return "flow";
    case Command::power: return "power";
    case Command::decompose: return "decompose";
    case Command::validate: return "validate";
    case Command::oracle: return "oracle";
  }
  return "flow";
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override) {
  allow(doc, "", {"command", "functional", "domain", "input", "flow", "power", "oracle", "validate", "seed", "output_dir"});
  ExperimentConfig c;
  c.raw = doc;
  if (!find(doc, "command")) fail("command", "missing");
  c.command = parse_command(text(doc, "", "command", ""));
  if (const json* s = find(doc, "seed")) {
    if (!is_index(*s)) fail("seed", "expected a non-negative integer");
    c.seed = s->get<std::uint64_t>();
    c.seed_source = "config";
  }
  if (seed_override) {
    c.seed = *seed_override;
    c.seed_source = "NLSPEC_SEED";
  }
  c.output_dir = text(doc, "", "output_dir", c.output_dir.string());

  auto only_for = [&](const char* key, std::initializer_list<Command> cmds) {
    if (find(doc, key) && std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
      fail(key, "not used by command " + std::string(to_string(c.command)));
  };
  only_for("flow", {Command::flow, Command::decompose});
  only_for("power", {Command::power});
  only_for("oracle", {Command::oracle});
  only_for("validate", {Command::validate});

  if (c.command == Command::validate) {
    for (const char* k : {"functional", "domain", "input"})
      if (find(doc, k)) fail(k, "not used by command validate");
    if (const json* v = find(doc, "validate")) {
      allow(*v, "validate", {"filter"});
      c.filter = text(*v, "validate", "filter", "");
    }
    return c;
  }

  if (!find(doc, "functional")) fail("functional", "missing");
  if (!find(doc, "domain")) fail("domain", "missing");
  c.functional = parse_functional(doc["functional"], doc["domain"]);
  if (const json* in = find(doc, "input")) parse_input(*in, base_dir, c);
  if (const json* f = find(doc, "flow")) parse_flow(*f, c.flow);
  if (const json* p = find(doc, "power")) parse_power(*p, c.power);
  c.power.power.certificate_seed = c.seed;
  if (const json* o = find(doc, "oracle")) parse_oracle(*o, c.oracle);

  const bool needs_input = c.command == Command::flow || c.command == Command::decompose ||
                           (c.command == Command::oracle && c.oracle.kind == OracleKind::heat);
  if (needs_input && !c.has_input) fail("input", "missing (required by command " + std::string(to_string(c.command)) + ")");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  std::optional<std::uint64_t> seed;
  if (const char* env = std::getenv("NLSPEC_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError("NLSPEC_SEED must be a non-negative integer");
    seed = v;
  }
  return parse_config(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(), seed);
}

}  // namespace nlspec::cli
