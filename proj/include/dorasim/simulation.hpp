#pragma once

// Round-driven orchestration of any policy against a cost stream, with
// dynamic regret bookkeeping and runtime checks of the DORA guarantees.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dorasim/baselines.hpp"
#include "dorasim/core.hpp"
#include "dorasim/policies.hpp"
#include "dorasim/reallocation.hpp"
#include "dorasim/scenario.hpp"

namespace dorasim {

/// Tolerance used by the runtime lemma and feasibility checks.
inline constexpr double kCheckTol = 1e-6;

struct RoundRecord {
  std::size_t round = 0;
  Allocation allocation;
  std::vector<double> costs;
  double global_cost = 0.0;
  std::size_t straggler = 0;
  Allocation oracle_allocation;
  double oracle_cost = 0.0;
  double instantaneous_regret = 0.0;
  double cumulative_regret = 0.0;
  double path_length_increment = 0.0;
  double cumulative_path_length = 0.0;
  double policy_time_s = 0.0;
};

struct CheckReport {
  bool enabled = false;
  std::size_t feasibility_violations = 0;
  std::size_t budget_equality_violations = 0;  // DORA only, rounds >= 2
  std::array<std::size_t, 5> lemma2_violations{};
  std::size_t lemma3_violations = 0;
  bool lemma3_applicable = false;  // needs declared Lipschitz bounds
  bool theorem_holds = true;
  std::vector<std::string> messages;  // first few violations

  bool passed() const;
};

struct RunSummary {
  double final_regret = 0.0;
  double tail_average_regret = 0.0;
  std::size_t tail_window = 0;
  double total_policy_time_s = 0.0;
  double path_length = 0.0;
  /// Largest declared Lipschitz bound over the run, 0 when none is declared.
  double lipschitz = 0.0;
  double regret_bound = 0.0;
  /// Largest ratio (f_t(x_t) - f_t(x*_t)) / |x*_s - x_s| seen on the run: the
  /// smallest constant for which the per-round inequality still follows.
  double effective_lipschitz = 0.0;
  double regret_bound_effective = 0.0;
};

struct RunResult {
  std::string algorithm;
  std::vector<RoundRecord> records;
  RunSummary summary;
  CheckReport checks;
};

struct RunOptions {
  std::size_t horizon = 470;
  double step_size = 0.02;
  double tol = kDefaultBisectionTol;
  bool checks = true;
};

/// Drives `policy` over rounds 1..horizon of `env`.
RunResult run_policy(Environment& env, Policy& policy, const RunOptions& options);

PolicyParams policy_params(const ScenarioConfig& config);
RunOptions run_options(const ScenarioConfig& config);

/// Runs the configured algorithm on the configured scenario.
RunResult run(const ScenarioConfig& config);

/// Runs every named policy on one shared cost stream.
std::vector<RunResult> run_compare(const ScenarioConfig& config,
                                   std::span<const std::string> policies);

double dynamic_regret(std::span<const RoundRecord> records);
double path_length(std::span<const RoundRecord> records);
double path_length(std::span<const Allocation> minimizers);

/// sqrt(T L^2 (3/(2 alpha) + P_T/alpha + T (4 + alpha)/2)).
double regret_bound(std::size_t horizon, double lipschitz, double step_size, double path_len);

/// Rounds averaged for the tail regret: 11 of 470, scaled to the horizon.
std::size_t tail_window(std::size_t horizon);
double tail_average_regret(std::span<const RoundRecord> records);

/// The five feasible-point properties relating x, its relinquish targets x'
/// and the optimum x*.
std::array<bool, 5> check_lemma2(const RoundRecord& record,
                                 std::span<const double> relinquish_targets,
                                 const Allocation& oracle, double tol = kCheckTol);

/// ((f(x) - f(x*)) / L)^2 <= 2 + <G, x - x*>.
bool check_lemma3(const RoundRecord& record, const UpdateDirection& direction,
                  const Allocation& oracle, double lipschitz, double tol = kCheckTol);

}  // namespace dorasim
