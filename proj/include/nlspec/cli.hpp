#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nlspec/flow.hpp"
#include "nlspec/functional.hpp"
#include "nlspec/power.hpp"
#include "nlspec/signal.hpp"

namespace nlspec::cli {

inline constexpr std::string_view library_version = "1.0.0";

enum class Command { flow, power, decompose, validate, oracle };

Command parse_command(std::string_view name);
std::string_view to_string(Command c) noexcept;

enum class OracleKind { spectrum, heat, distance, profile };

struct OracleOptions {
  OracleKind kind = OracleKind::spectrum;
  std::vector<double> times{1.0};
  double lambda = 1.0;  ///< profile only
  double p = 1.0;       ///< profile only
};

struct PowerRunOptions {
  PowerOptions power;
  std::size_t restarts = 4;
};

/// Parsed and validated experiment. `raw` is the document as read, echoed in
/// the manifest. Every default is filled in here so the manifest can record it.
struct ExperimentConfig {
  nlohmann::json raw;
  Command command = Command::flow;
  FunctionalHandle functional = make_l1(1);
  Signal input;
  bool has_input = false;
  std::string input_source;
  std::uint64_t seed = 0;
  std::string seed_source = "default";  ///< default, config or NLSPEC_SEED
  FlowOptions flow;
  PowerRunOptions power;
  OracleOptions oracle;
  std::string filter;  ///< validate only
  std::filesystem::path output_dir = "nlspec_out";
};

/// Strict parsing: unknown keys, wrong types and inconsistent sizes throw
/// ConfigError naming the offending key. Relative input files resolve against
/// base_dir. seed_override replaces the config seed.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".",
                              std::optional<std::uint64_t> seed_override = std::nullopt);

/// Reads path and applies NLSPEC_SEED from the environment when set.
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  bool strict = false;  ///< unconverged solves become errors
  std::size_t threads = 1;
  std::optional<std::filesystem::path> output_dir;
  bool profile = false;  ///< flow: also write profile.csv and the profile signal
};

/// 0 success, 1 error, 2 validation failure.
int run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

/// Fixed 17 significant digits, nan / inf / -inf for non-finite values.
std::string format_number(double x);

/// 1-D: "index value" lines. 2-D layouts: P2 image with maxval 65535 and
/// pixel = round(65535 (v - min) / (max - min)); returns {min, max}.
std::pair<double, double> write_signal(const std::filesystem::path& stem, const Signal& s,
                                       const WeightedGraph* graph, bool* as_image = nullptr);

struct Tolerances {
  std::map<std::string, double> columns;
  double fallback = 0.0;  ///< the "*" entry
};

/// "column tolerance" per line, "*" sets the fallback, '#' starts a comment.
Tolerances load_tolerances(const std::filesystem::path& path);

struct ColumnDeviation {
  std::string column;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::size_t worst_row = 0;  ///< 1-based data row
};

struct CompareReport {
  bool passed = true;
  std::vector<ColumnDeviation> columns;
  std::vector<std::string> failures;  ///< "row r column c: a vs b"
};

/// Column-wise max absolute deviation between two CSV files with identical
/// headers and row counts (SchemaMismatch otherwise). nan matches nan.
CompareReport compare_traces(const std::filesystem::path& a, const std::filesystem::path& b,
                             const Tolerances& tolerances);

struct ValidationCheck {
  std::string section;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Aggregate of every flow the validation suite ran.
struct FlowLedger {
  std::size_t runs = 0;
  std::size_t mass_violations = 0;  ///< runs with mass drift above 1e-10
  std::size_t lambda_violations = 0;
  double worst_mass_drift = 0.0;
  double worst_lambda_excess = 0.0;
  double worst_lambda_increase = 0.0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  FlowLedger flows;
  bool passed() const noexcept;
};

/// Built-in checks of every invariant, grouped by module. filter keeps checks
/// whose "section/name" contains it.
ValidationReport run_validation(std::string_view filter = {}, std::size_t threads = 1);

void print_validation_table(const ValidationReport& report, std::ostream& out);

}  // namespace nlspec::cli
