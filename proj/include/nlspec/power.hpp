#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlspec/diagnostics.hpp"
#include "nlspec/functional.hpp"
#include "nlspec/signal.hpp"

namespace nlspec {

/// constant: sigma_k = c / J(w_0). adaptive: sigma_k = c / J(w_k).
enum class StepRule { constant, adaptive };

StepRule parse_step_rule(std::string_view name);
std::string_view to_string(StepRule rule) noexcept;

struct PowerOptions {
  double c = 0.9;
  StepRule rule = StepRule::adaptive;
  double tol = 1e-10;
  std::size_t max_iter = 5000;
  double prox_tol = 1e-12;
  std::size_t certificate_samples = 64;
  std::uint64_t certificate_seed = 0;
  std::optional<double> poincare_constant;
};

struct PowerIterate {
  double J = 0.0;         ///< J(w_k)
  double residual = 0.0;  ///< ||v_k|| - <v_k, w_k>
  double sigma = 0.0;
  double v_norm = 0.0;
  double gap = 0.0;            ///< absolute prox gap
  double w_norm = 0.0;         ///< ||w_k||
  double nullspace_inner = 0.0;  ///< max |<w_k, b>| over the nullspace basis
  double fixed_point = 0.0;      ///< ||v_k - ||v_k|| w_k||, squared it equals 2 ||v_k|| residual
};

/// w is the last iterate whose prox was computed, v = prox_sigma(w).
/// lambda = (1 - mu) / (sigma mu^{p-1}) since (w - v) / sigma lies in dJ(v) = mu^{p-1} dJ(w).
struct EigenPair {
  Signal w;
  double mu = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double rayleigh = 0.0;  ///< p J(w)
  double residual = 0.0;  ///< ||v - mu w||
  EigenCertificate certificate;
  std::vector<PowerIterate> history;
  std::size_t iterations = 0;
  bool converged = false;
  bool prox_converged = true;  ///< every prox call certified
  double oscillation = 0.0;    ///< max pairwise distance over the last 10 iterates
  std::size_t start_index = 0;
};

/// Proximal power method from start. Stops once residual and fixed_point are
/// both at most tol. Throws NullspaceStart when start lies in the nullspace,
/// DegenerateEnergy when J(w_k) collapses below the floor.
EigenPair power_method(const FunctionalHandle& F, const Signal& start, const PowerOptions& options = {});

struct GroundStateResult {
  EigenPair best;
  std::vector<EigenPair> all;  ///< sorted by (rayleigh, start_index)
  std::vector<std::string> failures;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Start 0 is the all-ones vector plus a small seeded perturbation; starts
/// 1..restarts are seeded Gaussians. Starts run on up to `threads` threads and
/// the result does not depend on scheduling. Throws the first failure when
/// every start fails.
GroundStateResult ground_state_search(const FunctionalHandle& F, std::size_t restarts, std::uint64_t seed,
                                      const PowerOptions& options = {}, std::size_t threads = 1);

/// The deterministic start used by ground_state_search for a given index.
Signal power_start(const FunctionalHandle& F, std::size_t index, std::uint64_t seed);

/// Post-hoc checks of the power iteration invariants. Tolerances scale with
/// the prox gaps recorded in the history.
struct PowerAudit {
  std::size_t energy_violations = 0;
  std::size_t sphere_violations = 0;        ///< | ||w_k|| - 1 | > 1e-12
  std::size_t orthogonality_violations = 0;  ///< |<w_k, b>| > 1e-10
  std::size_t sigma_decreases = 0;           ///< adaptive rule only
  std::size_t zero_prox = 0;                 ///< ||v_k|| == 0
  std::size_t poincare_violations = 0;
  double residual_sum = 0.0;
  double residual_bound = 0.0;
  bool summable = true;
  double fixed_point_residual = 0.0;  ///< ||prox_{sigma(w)}(w) - mu w|| with the rule at w
  double max_sphere_error = 0.0;
};

PowerAudit audit_power(const EigenPair& pair, const FunctionalHandle& F, const PowerOptions& options = {});

}  // namespace nlspec
