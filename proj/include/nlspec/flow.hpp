#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "nlspec/diagnostics.hpp"
#include "nlspec/functional.hpp"
#include "nlspec/signal.hpp"

namespace nlspec {

/// constant: fixed tau. refine: halve tau (down to tau_min) whenever a step
/// would extinguish the flow. event_aligned: for l1 / linf, shorten steps so
/// they end exactly at the breakpoints of the closed-form flow; constant otherwise.
enum class ScheduleKind { constant, refine, event_aligned };

ScheduleKind parse_schedule_kind(std::string_view name);
std::string_view to_string(ScheduleKind kind) noexcept;

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::constant;
  double tau = 0.0;      ///< 0 selects default_step
  double tau_min = 0.0;  ///< refine only; 0 selects tau * 2^-20
};

struct StopCriteria {
  std::size_t max_steps = 100000;
  double time_horizon = std::numeric_limits<double>::infinity();
  double extinction_tol = 1e-8;  ///< relative to dist_0
};

struct FlowOptions {
  StepSchedule schedule;
  StopCriteria stop;
  double prox_tol = 1e-12;
  std::size_t prox_max_iter = 200000;
  bool store_iterates = false;
  std::size_t ring_size = 16;
};

/// Record k describes u_k. tau_k and zeta_k belong to the step that produced
/// it (record 0 has tau = 0 and zeta = NaN); zeta_k is in dJ(u_k).
struct FlowStep {
  std::size_t k = 0;
  double t = 0.0;
  double tau = 0.0;
  double J = 0.0;
  double dist = 0.0;
  double Lambda = 0.0;  ///< frozen at the last value once dist falls below the profile floor
  double zeta_norm = 0.0;
  double profile_residual = 0.0;
  double gap = 0.0;  ///< absolute prox gap of this step
  bool prox_converged = true;
  int retries = 0;
};

struct FlowTrace {
  double degree = 1.0;
  Signal f;           ///< datum mapped into the domain
  Signal u_infinity;  ///< P_N f
  std::vector<FlowStep> steps;
  std::vector<Signal> zetas;     ///< zeta_k by record, empty for record 0
  std::vector<Signal> iterates;  ///< u_k, only with store_iterates
  std::deque<Signal> recent;     ///< the last ring_size iterates
  Signal u_last;
  Signal w_last;  ///< (u_k - u_inf) / dist_k for the last k above the profile floor
  double profile_floor = 0.0;  ///< max(nullspace floor, extinction_tol * dist_0)
  std::optional<std::size_t> extinction_index;
  double resolved_tau = 0.0;
  ScheduleKind schedule = ScheduleKind::constant;
  std::size_t unconverged_steps = 0;
  double accumulated_gap = 0.0;
  double max_profile_drift = 0.0;  ///< max_k ||w_k - w_0|| over records above the floor
  double mass_drift = 0.0;         ///< max_k ||P_N u_k - P_N f||
};

/// 0.1 * prox_nonvanishing_bound for p != 2, 0.1 / (Gershgorin bound of M^{-1} A) for p = 2.
/// Returns 1 when f lies in the nullspace.
double default_step(const FunctionalHandle& F, const Signal& f);

/// Implicit Euler u_{k+1} = prox_{tau_k J}(u_k). Steps whose prox does not
/// converge are retried with half the step up to three times, then accepted
/// and counted in unconverged_steps.
FlowTrace run_flow(const FunctionalHandle& F, const Signal& f, const FlowOptions& options = {});

struct ExtinctionReport {
  std::optional<double> measured;
  std::optional<double> upper;
  double lower = 0.0;
};

/// upper = dist_0^{2-p} / ((2-p) lambda1) for p < 2 and lambda1 > 0.
/// lower (p = 1 only) = max <f - u_inf, u> / J(u) over f - u_inf, the
/// candidate, +-coordinate directions and seeded random directions.
ExtinctionReport extinction_report(const FlowTrace& trace, const FunctionalHandle& F,
                                   std::optional<double> lambda1_estimate, const Signal* candidate = nullptr,
                                   std::size_t random_directions = 64, std::uint64_t seed = 0);

/// Signed slack (>= 0 means satisfied) of the continuous-time envelopes at
/// every record; improved_* only when extinction was measured and p < 2.
struct EnvelopeReport {
  std::vector<double> upper;
  std::vector<double> lower;  ///< anchored at t_1; NaN for records 0 and 1
  std::vector<double> improved_lower;
  std::vector<double> improved_upper;
  double worst_upper = std::numeric_limits<double>::infinity();
  double worst_lower = std::numeric_limits<double>::infinity();
  double worst_improved_lower = std::numeric_limits<double>::infinity();
  double worst_improved_upper = std::numeric_limits<double>::infinity();
};

EnvelopeReport check_decay_envelopes(const FlowTrace& trace, const FunctionalHandle& F, double lambda1_estimate);

struct Decomposition {
  std::vector<Signal> bands;  ///< tau_k zeta_k, k >= 1
  Signal nullspace_part;
  Signal remainder;  ///< u_last - u_inf
  double reconstruction_residual = 0.0;
};

/// f is mapped into the trace's domain first.
Decomposition decompose(const FlowTrace& trace, const FunctionalHandle& F, const Signal& f);

struct BandScores {
  std::vector<EigenCertificate> certificates;  ///< per record k >= 1
  double orthogonality_residual = 0.0;         ///< max |<zeta_t, zeta_s - zeta_r>| over r < s <= t
};

/// One-homogeneous functionals only (UnsupportedFunctional otherwise).
/// Certifies zeta_k as an eigenvector with lambda = ||zeta_k||.
BandScores band_eigen_scores(const FlowTrace& trace, const FunctionalHandle& F, std::size_t samples = 64,
                             std::uint64_t seed = 0);

struct ProfileReport {
  Signal w_last;
  double lambda_last = 0.0;
  std::vector<double> profile_residual_history;
};

ProfileReport profile_convergence(const FlowTrace& trace);

/// Monotonicity and mass conservation along a trace, with tolerances scaled
/// by the prox gaps of the individual steps.
struct FlowAudit {
  std::size_t energy_violations = 0;
  std::size_t distance_violations = 0;
  std::size_t lambda_violations = 0;
  double worst_energy_excess = 0.0;  ///< largest increase beyond tolerance, 0 when none
  double worst_distance_excess = 0.0;
  double worst_lambda_excess = 0.0;
  double worst_lambda_increase = 0.0;  ///< largest raw increase, reported even when tolerated
  double mass_drift = 0.0;             ///< copied from the trace
};

FlowAudit audit_flow(const FlowTrace& trace, const FunctionalHandle& F);

}  // namespace nlspec
