#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "nlspec/cli.hpp"
#include "nlspec/diagnostics.hpp"
#include "nlspec/error.hpp"
#include "nlspec/oracles.hpp"

#include "internal.hpp"

namespace nlspec::cli {
namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

json jnum(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

std::string padded(std::size_t k) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%05zu", k);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

void write_csv(const fs::path& p, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  auto out = open_out(p);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << format_number(r[c]);
    out << '\n';
  }
}

/// Collects the image scalings of every written signal for the manifest.
struct SignalWriter {
  fs::path dir;
  const WeightedGraph* graph;
  json scalings = json::object();

  void operator()(const std::string& name, const Signal& s) {
    bool image = false;
    const auto [lo, hi] = write_signal(dir / name, s, graph, &image);
    if (image) scalings[(dir.filename() / (name + ".pgm")).generic_string()] = {{"min", jnum(lo)}, {"max", jnum(hi)}};
  }
};

void write_trace(const fs::path& p, const FlowTrace& tr) {
  std::vector<std::vector<double>> rows;
  for (const FlowStep& s : tr.steps)
    rows.push_back({double(s.k), s.t, s.tau, s.J, s.dist, s.Lambda, s.zeta_norm, s.profile_residual});
  write_csv(p, {"k", "t", "tau", "J", "dist", "Lambda", "zeta_norm", "profile_residual"}, rows);
}

json flow_resolved(const FlowOptions& o, const FlowTrace& tr) {
  return {{"schedule", std::string(to_string(o.schedule.kind))},
          {"tau", jnum(tr.resolved_tau)},
          {"tau_min", jnum(o.schedule.tau_min)},
          {"max_steps", o.stop.max_steps},
          {"horizon", jnum(o.stop.time_horizon)},
          {"extinction_tol", jnum(o.stop.extinction_tol)},
          {"prox_tol", jnum(o.prox_tol)},
          {"prox_max_iter", o.prox_max_iter},
          {"store_iterates", o.store_iterates},
          {"ring_size", o.ring_size}};
}

json flow_results(const FlowTrace& tr, const FunctionalHandle& F) {
  const FlowAudit a = audit_flow(tr, F);
  json r = {{"steps", tr.steps.size()},
            {"unconverged_steps", tr.unconverged_steps},
            {"accumulated_gap", jnum(tr.accumulated_gap)},
            {"mass_drift", jnum(tr.mass_drift)},
            {"max_profile_drift", jnum(tr.max_profile_drift)},
            {"energy_violations", a.energy_violations},
            {"distance_violations", a.distance_violations},
            {"lambda_violations", a.lambda_violations},
            {"worst_lambda_increase", jnum(a.worst_lambda_increase)}};
  if (tr.extinction_index) {
    r["extinction_index"] = *tr.extinction_index;
    r["extinction_time"] = jnum(tr.steps[*tr.extinction_index].t);
  } else {
    r["extinction_index"] = nullptr;
    r["extinction_time"] = nullptr;
  }
  return r;
}

json power_resolved(const PowerRunOptions& o) {
  json r = {{"c", jnum(o.power.c)},
            {"rule", std::string(to_string(o.power.rule))},
            {"tol", jnum(o.power.tol)},
            {"max_iter", o.power.max_iter},
            {"prox_tol", jnum(o.power.prox_tol)},
            {"restarts", o.restarts},
            {"certificate_samples", o.power.certificate_samples},
            {"certificate_seed", o.power.certificate_seed}};
  r["poincare_constant"] = o.power.poincare_constant ? jnum(*o.power.poincare_constant) : json(nullptr);
  return r;
}

struct Outcome {
  json resolved = json::object();
  json results = json::object();
  std::vector<std::string> warnings;
  int status = 0;
};

Outcome run_flow_command(const ExperimentConfig& c, const RunOptions& ro, const fs::path& dir, SignalWriter& sig,
                         std::ostream& log) {
  Outcome oc;
  const FunctionalHandle& F = c.functional;
  const FlowTrace tr = run_flow(F, c.input, c.flow);
  write_trace(dir / "trace.csv", tr);
  sig("input", tr.f);
  sig("u_last", tr.u_last);
  sig("u_infinity", tr.u_infinity);
  if (!tr.w_last.empty()) sig("w_last", tr.w_last);
  for (std::size_t k = 0; k < tr.iterates.size(); ++k) sig("u_" + padded(k), tr.iterates[k]);
  oc.resolved["flow"] = flow_resolved(c.flow, tr);
  oc.results = flow_results(tr, F);
  if (tr.unconverged_steps)
    oc.warnings.push_back("prox did not converge on " + std::to_string(tr.unconverged_steps) + " step(s)");

  if (ro.profile) {
    const ProfileReport pr = profile_convergence(tr);
    std::vector<std::vector<double>> rows;
    for (const FlowStep& s : tr.steps) rows.push_back({double(s.k), s.t, s.Lambda, s.profile_residual});
    write_csv(dir / "profile.csv", {"k", "t", "Lambda", "profile_residual"}, rows);
    if (!pr.w_last.empty()) sig("profile", pr.w_last);
    oc.results["profile"] = {{"lambda_last", jnum(pr.lambda_last)}, {"max_profile_drift", jnum(tr.max_profile_drift)}};
  }

  if (c.command == Command::decompose) {
    const Decomposition d = decompose(tr, F, c.input);
    fs::create_directories(dir / "bands");
    SignalWriter bands{dir / "bands", F.graph()};
    std::vector<std::vector<double>> rows;
    const bool certify = F.one_homogeneous();
    std::optional<BandScores> scores;
    if (certify) scores = band_eigen_scores(tr, F, 64, c.seed);
    for (std::size_t k = 0; k < d.bands.size(); ++k) {
      bands("band_" + padded(k + 1), d.bands[k]);
      const FlowStep& s = tr.steps[k + 1];
      std::vector<double> row{double(k + 1), s.t, s.tau, F.norm(d.bands[k])};
      if (certify) {
        const EigenCertificate& e = scores->certificates[k];
        row.insert(row.end(), {e.euler_residual, e.subgradient_gap, e.collinearity});
      }
      rows.push_back(row);
    }
    std::vector<std::string> header{"k", "t", "tau", "norm"};
    if (certify) header.insert(header.end(), {"euler_residual", "subgradient_gap", "collinearity"});
    write_csv(dir / "bands" / "bands.csv", header, rows);
    bands("nullspace_part", d.nullspace_part);
    bands("remainder", d.remainder);
    for (auto& [k, v] : bands.scalings.items()) sig.scalings[k] = v;
    oc.results["reconstruction_residual"] = jnum(d.reconstruction_residual);
    oc.results["bands"] = d.bands.size();
    if (scores) oc.results["band_orthogonality_residual"] = jnum(scores->orthogonality_residual);
  }
  log << to_string(c.command) << ": " << tr.steps.size() << " records";
  if (tr.extinction_index) log << ", extinct at t = " << format_number(tr.steps[*tr.extinction_index].t);
  log << '\n';
  return oc;
}

Outcome run_power_command(const ExperimentConfig& c, const RunOptions& ro, const fs::path& dir, SignalWriter& sig,
                          std::ostream& log) {
  Outcome oc;
  const FunctionalHandle& F = c.functional;
  const GroundStateResult res = ground_state_search(F, c.power.restarts, c.seed, c.power.power, ro.threads);
  std::vector<std::vector<double>> rows;
  std::size_t unconverged = 0;
  for (const EigenPair& e : res.all) {
    rows.push_back({double(e.start_index), e.lambda, e.mu, e.sigma, e.rayleigh, e.residual, e.certificate.euler_residual,
                    e.certificate.subgradient_gap, e.certificate.collinearity, double(e.iterations),
                    e.converged ? 1.0 : 0.0, e.oscillation});
    sig("eigen_" + padded(e.start_index), e.w);
    if (!e.converged || !e.prox_converged) ++unconverged;
  }
  write_csv(dir / "eigen.csv",
            {"restart", "lambda", "mu", "sigma", "rayleigh", "residual", "euler_residual", "subgradient_gap",
             "collinearity", "iterations", "converged", "oscillation"},
            rows);
  sig("ground_state", res.best.w);
  const PowerAudit a = audit_power(res.best, F, c.power.power);
  oc.resolved["power"] = power_resolved(c.power);
  oc.results = {{"best_restart", res.best.start_index},
                {"lambda", jnum(res.best.lambda)},
                {"rayleigh", jnum(res.best.rayleigh)},
                {"lambda_min", jnum(res.lambda_min)},
                {"lambda_max", jnum(res.lambda_max)},
                {"failures", res.failures},
                {"energy_violations", a.energy_violations},
                {"sphere_violations", a.sphere_violations},
                {"sigma_decreases", a.sigma_decreases},
                {"summable", a.summable},
                {"fixed_point_residual", jnum(a.fixed_point_residual)}};
  if (unconverged) oc.warnings.push_back(std::to_string(unconverged) + " restart(s) did not converge");
  for (const std::string& f : res.failures) oc.warnings.push_back(f);
  log << "power: best lambda " << format_number(res.best.lambda) << " from restart " << res.best.start_index << '\n';
  return oc;
}

Outcome run_oracle_command(const ExperimentConfig& c, const fs::path& dir, SignalWriter& sig, std::ostream& log) {
  Outcome oc;
  const FunctionalHandle& F = c.functional;
  const OracleOptions& o = c.oracle;
  std::vector<std::vector<double>> rows;
  switch (o.kind) {
    case OracleKind::spectrum: {
      const auto r = detail::reduced_spectrum(F);
      for (std::size_t i = 0; i < r.spectrum.eigenvalues.size(); ++i) {
        rows.push_back({double(i), r.spectrum.eigenvalues[i]});
        sig("eigvec_" + padded(i), r.embed(r.spectrum.eigenvectors[i]));
      }
      write_csv(dir / "spectrum.csv", {"index", "eigenvalue"}, rows);
      oc.results["first_nonzero"] = r.first_nonzero();
      oc.results["lambda1"] = jnum(r.spectrum.eigenvalues[r.first_nonzero()]);
      break;
    }
    case OracleKind::heat: {
      const auto r = detail::reduced_spectrum(F);
      const Signal f = r.restrict(c.input);
      for (std::size_t i = 0; i < o.times.size(); ++i) {
        const Signal u = r.embed(oracles::linear_heat_solution(r.spectrum, f, o.times[i]));
        rows.push_back({o.times[i], F.norm(u)});
        sig("heat_" + padded(i), u);
      }
      write_csv(dir / "heat.csv", {"t", "norm"}, rows);
      break;
    }
    case OracleKind::distance: {
      if (!F.graph()) throw ConfigError("config key 'oracle.kind': distance needs a graph or grid domain");
      const Signal d = oracles::distance_transform(*F.graph());
      sig("distance", d);
      oc.results["max_distance"] = jnum(max_abs(d));
      break;
    }
    case OracleKind::profile:
      for (double t : o.times) rows.push_back({t, oracles::eigen_profile(o.lambda, o.p, t)});
      write_csv(dir / "profile.csv", {"t", "a"}, rows);
      break;
  }
  oc.resolved["oracle"] = {{"times", o.times}, {"lambda", jnum(o.lambda)}, {"p", jnum(o.p)}};
  log << "oracle: done\n";
  return oc;
}

Outcome run_validate_command(const ExperimentConfig& c, const RunOptions& ro, const fs::path& dir, std::ostream& log) {
  Outcome oc;
  const ValidationReport rep = run_validation(c.filter, ro.threads);
  print_validation_table(rep, log);
  auto out = open_out(dir / "validation.csv");
  out << "section,name,passed,detail\n";
  std::size_t failed = 0;
  for (const ValidationCheck& v : rep.checks) {
    out << v.section << ',' << v.name << ',' << (v.passed ? 1 : 0) << ",\"" << v.detail << "\"\n";
    if (!v.passed) ++failed;
  }
  oc.resolved["validate"] = {{"filter", c.filter}};
  oc.results = {{"checks", rep.checks.size()}, {"failed", failed}, {"flow_runs", rep.flows.runs}};
  oc.status = rep.passed() ? 0 : 2;
  return oc;
}

}  // namespace

std::pair<double, double> write_signal(const fs::path& stem, const Signal& s, const WeightedGraph* graph, bool* as_image) {
  double lo = INFINITY, hi = -INFINITY;
  for (double x : s) lo = std::min(lo, x), hi = std::max(hi, x);
  if (s.empty()) lo = hi = 0.0;
  {
    auto out = open_out(fs::path(stem.string() + ".txt"));
    for (std::size_t i = 0; i < s.size(); ++i) out << i << ' ' << format_number(s[i]) << '\n';
  }
  const bool image = graph && graph->layout() && graph->layout()->height > 1 && graph->node_count() == s.size();
  if (as_image) *as_image = image;
  if (image) {
    const auto& L = *graph->layout();
    auto out = open_out(fs::path(stem.string() + ".pgm"));
    out << "P2\n# pixel = round(65535 * (value - " << format_number(lo) << ") / (" << format_number(hi) << " - "
        << format_number(lo) << "))\n"
        << L.width << ' ' << L.height << "\n65535\n";
    for (std::size_t y = 0; y < L.height; ++y) {
      for (std::size_t x = 0; x < L.width; ++x) {
        const double v = s[y * L.width + x];
        const long px = hi > lo ? std::lround(65535.0 * (v - lo) / (hi - lo)) : 0;
        out << (x ? " " : "") << px;
      }
      out << '\n';
    }
  }
  return {lo, hi};
}

int run_experiment(const ExperimentConfig& c, const RunOptions& ro, std::ostream& log) {
  const fs::path dir = ro.output_dir ? *ro.output_dir : c.output_dir;
  fs::create_directories(dir / "signals");
  SignalWriter sig{dir / "signals", c.command == Command::validate ? nullptr : c.functional.graph()};

  Outcome oc;
  switch (c.command) {
    case Command::flow:
    case Command::decompose: oc = run_flow_command(c, ro, dir, sig, log); break;
    case Command::power: oc = run_power_command(c, ro, dir, sig, log); break;
    case Command::oracle: oc = run_oracle_command(c, dir, sig, log); break;
    case Command::validate: oc = run_validate_command(c, ro, dir, log); break;
  }

  json m;
  m["version"] = std::string(library_version);
  m["command"] = std::string(to_string(c.command));
  m["config"] = c.raw;
  m["seed"] = {{"value", c.seed}, {"source", c.seed_source}};
  m["resolved"] = oc.resolved;
  m["resolved"]["output_dir"] = dir.generic_string();
  if (c.command != Command::validate) {
    m["resolved"]["functional"] = {{"kind", std::string(to_string(c.functional.kind()))},
                                   {"degree", jnum(c.functional.degree())},
                                   {"dimension", c.functional.dimension()},
                                   {"nullspace_dimension", c.functional.nullspace_basis().size()},
                                   {"dirichlet_nodes", c.functional.has_dirichlet_nodes()}};
    m["resolved"]["input_source"] = c.has_input ? json(c.input_source) : json(nullptr);
  }
  m["results"] = oc.results;
  m["netpbm"] = {{"format", "P2"},
                 {"maxval", 65535},
                 {"scaling", "pixel = round(65535 * (value - min) / (max - min)), 0 when max == min"},
                 {"files", sig.scalings}};
  m["warnings"] = oc.warnings;
  m["not_converged"] = !oc.warnings.empty();
  {
    auto out = open_out(dir / "manifest.json");
    out << m.dump(2) << '\n';
  }
  for (const std::string& w : oc.warnings) log << "warning: " << w << '\n';
  if (oc.status != 0) return oc.status;
  if (ro.strict && !oc.warnings.empty()) {
    log << "error: --strict and the run reported warnings\n";
    return 1;
  }
  return 0;
}

}  // namespace nlspec::cli
