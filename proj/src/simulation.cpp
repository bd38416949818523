#include "dorasim/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

namespace dorasim {

namespace {

constexpr std::size_t kMaxCheckMessages = 10;

void note(CheckReport& report, std::size_t round, const std::string& what) {
  if (report.messages.size() < kMaxCheckMessages) {
    report.messages.push_back("round " + std::to_string(round) + ": " + what);
  }
}

// max declared Lipschitz bound of the round, nullopt when any is missing
std::optional<double> declared_lipschitz(std::span<const CostFunction> costs) {
  double l = 0.0;
  for (const CostFunction& f : costs) {
    if (!f.lipschitz_bound()) return std::nullopt;
    l = std::max(l, *f.lipschitz_bound());
  }
  return l;
}

double sum_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

bool CheckReport::passed() const {
  if (!enabled) return true;
  if (feasibility_violations || budget_equality_violations || lemma3_violations) return false;
  for (std::size_t v : lemma2_violations) {
    if (v) return false;
  }
  return theorem_holds;
}

RunResult run_policy(Environment& env, Policy& policy, const RunOptions& options) {
  if (options.horizon < 1) throw DomainError("horizon must be at least 1");
  const bool is_dora = policy.name() == kDora;
  const std::size_t n = env.num_agents();

  RunResult out;
  out.algorithm = std::string(policy.name());
  out.records.reserve(options.horizon);
  out.checks.enabled = options.checks;
  out.checks.lemma3_applicable = is_dora;

  Allocation prev_played;
  CostVector prev_outcome;
  Observation prev_obs;
  double cumulative_regret = 0.0;
  double cumulative_path = 0.0;
  double lipschitz = 0.0;
  bool lipschitz_declared = true;
  double effective_lipschitz = 0.0;

  for (std::size_t t = 1; t <= options.horizon; ++t) {
    DecisionContext ctx;
    ctx.round = t;
    ctx.previous = t > 1 ? &prev_obs : nullptr;
    if (policy.clairvoyant()) ctx.current_optimum = &env.round(t).oracle;

    const auto start = std::chrono::steady_clock::now();
    Allocation alloc = policy.decide(ctx);
    const auto stop = std::chrono::steady_clock::now();

    const RoundEnvironment& round_env = env.round(t);
    if (alloc.size() != n) throw DomainError("policy returned an allocation of the wrong size");
    CostVector cv = evaluate_global(round_env.costs, alloc);

    RoundRecord rec;
    rec.round = t;
    rec.allocation = alloc;
    rec.costs = cv.per_agent;
    rec.global_cost = cv.global;
    rec.straggler = cv.straggler_index;
    rec.oracle_allocation = round_env.oracle.allocation;
    rec.oracle_cost = round_env.oracle.cost;
    rec.instantaneous_regret = rec.global_cost - rec.oracle_cost;
    cumulative_regret += rec.instantaneous_regret;
    rec.cumulative_regret = cumulative_regret;
    if (t > 1) {
      const auto& prev_opt = out.records.back().oracle_allocation;
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = prev_opt[i] - rec.oracle_allocation[i];
        sq += d * d;
      }
      rec.path_length_increment = std::sqrt(sq);
    }
    cumulative_path += rec.path_length_increment;
    rec.cumulative_path_length = cumulative_path;
    rec.policy_time_s = std::chrono::duration<double>(stop - start).count();

    const std::optional<double> round_l = declared_lipschitz(round_env.costs);
    if (round_l) {
      lipschitz = std::max(lipschitz, *round_l);
    } else {
      lipschitz_declared = false;
    }
    const double gap = rec.global_cost - rec.oracle_cost;
    const double dx = std::abs(rec.oracle_allocation[rec.straggler] - alloc[rec.straggler]);
    if (gap > options.tol && dx > 0.0) effective_lipschitz = std::max(effective_lipschitz, gap / dx);

    if (options.checks) {
      CheckReport& rep = out.checks;
      if (!is_feasible(alloc.shares())) {
        ++rep.feasibility_violations;
        note(rep, t, "allocation infeasible");
      }
      if (is_dora) {
        if (t > 1 && std::abs(alloc.sum() - 1.0) > kFeasibilityEps) {
          ++rep.budget_equality_violations;
          note(rep, t, "budget not fully allocated");
        }
        std::vector<double> targets(n);
        for (std::size_t i = 0; i < n; ++i) {
          targets[i] = relinquish_target(round_env.costs[i], alloc[i], cv.global, options.tol);
        }
        const auto lemma2 = check_lemma2(rec, targets, rec.oracle_allocation);
        for (std::size_t k = 0; k < lemma2.size(); ++k) {
          if (!lemma2[k]) {
            ++rep.lemma2_violations[k];
            note(rep, t, "lemma 2 property " + std::to_string(k + 1) + " violated");
          }
        }
        if (round_l) {
          const UpdateDirection g = update_direction(alloc.shares(), targets, cv.straggler_index);
          if (!check_lemma3(rec, g, rec.oracle_allocation, *round_l)) {
            ++rep.lemma3_violations;
            note(rep, t, "lemma 3 inequality violated");
          }
        } else {
          rep.lemma3_applicable = false;
        }
      }
    }

    out.records.push_back(std::move(rec));
    prev_played = std::move(alloc);
    prev_outcome = std::move(cv);
    prev_obs.round = t;
    prev_obs.costs = round_env.costs;
    prev_obs.played = &prev_played;
    prev_obs.outcome = &prev_outcome;
  }

  RunSummary& s = out.summary;
  s.final_regret = cumulative_regret;
  s.tail_window = tail_window(options.horizon);
  s.tail_average_regret = tail_average_regret(out.records);
  for (const RoundRecord& r : out.records) s.total_policy_time_s += r.policy_time_s;
  s.path_length = cumulative_path;
  s.lipschitz = lipschitz_declared ? lipschitz : 0.0;
  s.effective_lipschitz = effective_lipschitz;
  s.regret_bound_effective =
      regret_bound(options.horizon, effective_lipschitz, options.step_size, cumulative_path);
  if (lipschitz_declared) {
    s.regret_bound = regret_bound(options.horizon, lipschitz, options.step_size, cumulative_path);
  }
  if (options.checks && is_dora && lipschitz_declared) {
    out.checks.theorem_holds = s.final_regret <= s.regret_bound + kCheckTol;
    if (!out.checks.theorem_holds) note(out.checks, options.horizon, "regret bound exceeded");
  }
  return out;
}

PolicyParams policy_params(const ScenarioConfig& config) {
  PolicyParams p;
  p.num_agents = config.num_agents;
  p.step_size = config.step_size;
  p.share_floor = config.domain_floor;
  p.tol = config.bisection_tol;
  p.fkm_delta = config.fkm_delta;
  p.omd_divergence_weight = config.omd_divergence_weight;
  p.seed = config.seed;
  p.initial_allocation = config.initial_allocation;
  return p;
}

RunOptions run_options(const ScenarioConfig& config) {
  return RunOptions{config.horizon, config.step_size, config.bisection_tol, config.checks};
}

RunResult run(const ScenarioConfig& config) {
  Environment env = make_environment(config);
  auto policy = make_policy(config.algorithm, policy_params(config));
  return run_policy(env, *policy, run_options(config));
}

std::vector<RunResult> run_compare(const ScenarioConfig& config,
                                   std::span<const std::string> policies) {
  // fail on a bad name before any work is done
  for (const std::string& name : policies) make_policy(name, policy_params(config));
  Environment env = make_environment(config);
  std::vector<RunResult> results;
  results.reserve(policies.size());
  for (const std::string& name : policies) {
    auto policy = make_policy(name, policy_params(config));
    results.push_back(run_policy(env, *policy, run_options(config)));
  }
  return results;
}

double dynamic_regret(std::span<const RoundRecord> records) {
  double total = 0.0;
  for (const RoundRecord& r : records) total += r.global_cost - r.oracle_cost;
  return total;
}

double path_length(std::span<const Allocation> minimizers) {
  double total = 0.0;
  for (std::size_t t = 1; t < minimizers.size(); ++t) {
    if (minimizers[t].size() != minimizers[t - 1].size()) {
      throw DomainError("minimizers change dimension");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < minimizers[t].size(); ++i) {
      const double d = minimizers[t - 1][i] - minimizers[t][i];
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return total;
}

double path_length(std::span<const RoundRecord> records) {
  std::vector<Allocation> minimizers;
  minimizers.reserve(records.size());
  for (const RoundRecord& r : records) minimizers.push_back(r.oracle_allocation);
  return path_length(std::span<const Allocation>(minimizers));
}

double regret_bound(std::size_t horizon, double lipschitz, double step_size, double path_len) {
  if (!(step_size > 0.0)) throw DomainError("step size must be positive");
  const double t = static_cast<double>(horizon);
  return std::sqrt(t * lipschitz * lipschitz *
                   (3.0 / (2.0 * step_size) + path_len / step_size + t * (4.0 + step_size) / 2.0));
}

std::size_t tail_window(std::size_t horizon) {
  const double scaled = 11.0 * static_cast<double>(horizon) / 470.0;
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(scaled)), 1, horizon);
}

double tail_average_regret(std::span<const RoundRecord> records) {
  if (records.empty()) return 0.0;
  const std::size_t w = tail_window(records.size());
  double total = 0.0;
  for (std::size_t i = records.size() - w; i < records.size(); ++i) {
    total += records[i].cumulative_regret;
  }
  return total / static_cast<double>(w);
}

std::array<bool, 5> check_lemma2(const RoundRecord& record,
                                 std::span<const double> relinquish_targets,
                                 const Allocation& oracle, double tol) {
  const auto& x = record.allocation;
  const std::size_t n = x.size();
  if (relinquish_targets.size() != n || oracle.size() != n) {
    throw DomainError("lemma check inputs have mismatched sizes");
  }
  const std::size_t s = record.straggler;
  std::array<bool, 5> ok{};
  ok[0] = x[s] <= oracle[s] + tol;
  ok[1] = true;
  ok[3] = true;
  double cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ok[1] = ok[1] && relinquish_targets[i] <= x[i] + tol;
    ok[3] = ok[3] && relinquish_targets[i] <= oracle[i] + tol;
    if (i != s) cross += (x[i] - relinquish_targets[i]) * (x[i] - oracle[i]);
  }
  ok[2] = sum_of(relinquish_targets) <= 1.0 + tol;
  ok[4] = cross >= -2.0 - tol;
  return ok;
}

bool check_lemma3(const RoundRecord& record, const UpdateDirection& direction,
                  const Allocation& oracle, double lipschitz, double tol) {
  const auto& x = record.allocation;
  if (direction.components.size() != x.size() || oracle.size() != x.size()) {
    throw DomainError("lemma check inputs have mismatched sizes");
  }
  if (!(lipschitz > 0.0)) throw DomainError("Lipschitz constant must be positive");
  double inner = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) inner += direction.components[i] * (x[i] - oracle[i]);
  const double scaled_gap = (record.global_cost - record.oracle_cost) / lipschitz;
  return scaled_gap * scaled_gap <= 2.0 + inner + tol;
}

}  // namespace dorasim
