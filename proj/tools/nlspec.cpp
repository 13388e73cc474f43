#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nlspec/cli.hpp"
#include "nlspec/error.hpp"

using namespace nlspec;

int main(int argc, char** argv) {
  CLI::App app{"nonlinear spectral analysis of p-homogeneous functionals on graphs"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(cli::library_version));

  bool strict = false, profile = false;
  std::size_t threads = 1;
  std::string output_dir, config, filter, a, b, tol_file;
  app.add_flag("--strict", strict, "treat unconverged solves as errors");
  app.add_option("--threads", threads, "worker threads for restarts and validation")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", output_dir, "override the config output_dir");

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config, "JSON config")->required();
  run->add_flag("--profile", profile, "flow: write profile.csv and the asymptotic profile");
  auto* validate = app.add_subcommand("validate", "run the built-in validation suite");
  validate->add_option("--filter", filter, "keep checks whose section/name contains this");
  auto* compare = app.add_subcommand("compare", "compare two CSV traces column by column");
  compare->add_option("a", a)->required();
  compare->add_option("b", b)->required();
  compare->add_option("--tol-file", tol_file, "lines 'column tolerance', '*' for the default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const cli::ExperimentConfig c = cli::load_config(config);
      cli::RunOptions ro;
      ro.strict = strict;
      ro.threads = threads;
      ro.profile = profile;
      if (!output_dir.empty()) ro.output_dir = output_dir;
      return cli::run_experiment(c, ro, std::cout);
    }
    if (*validate) {
      const cli::ValidationReport rep = cli::run_validation(filter, threads);
      cli::print_validation_table(rep, std::cout);
      return rep.passed() ? 0 : 2;
    }
    cli::Tolerances tol;
    if (!tol_file.empty()) tol = cli::load_tolerances(tol_file);
    const cli::CompareReport rep = cli::compare_traces(a, b, tol);
    for (const auto& c : rep.columns)
      std::cout << c.column << "  max " << cli::format_number(c.max_deviation) << "  tol "
                << cli::format_number(c.tolerance) << '\n';
    for (const auto& f : rep.failures) std::cout << "FAIL " << f << '\n';
    std::cout << (rep.passed ? "match\n" : "mismatch\n");
    return rep.passed ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "nlspec: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "nlspec: " << e.what() << '\n';
    return 1;
  }
}
