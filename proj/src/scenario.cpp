#include "dorasim/scenario.hpp"

#include <algorithm>

namespace dorasim {

void ScenarioConfig::validate() const {
  if (num_agents < 1) throw DomainError("num_agents must be at least 1");
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  if (!(step_size > 0.0 && step_size < 1.0)) throw DomainError("step_size must lie in (0, 1)");
  if (!(bisection_tol > 0.0)) throw DomainError("bisection_tol must be positive");
  if (!(domain_floor > 0.0) || static_cast<double>(num_agents) * domain_floor >= 1.0) {
    throw DomainError("domain_floor must be positive and leave room in the budget");
  }
  if (!(fkm_delta > 0.0)) throw DomainError("fkm_delta must be positive");
  if (omd_divergence_weight && !(*omd_divergence_weight > 0.0)) {
    throw DomainError("omd_divergence_weight must be positive");
  }
  radio.validate();
  arena.validate();
  if (!agents.empty() && agents.size() != num_agents) {
    throw DomainError("agent list length differs from num_agents");
  }
  for (const AgentProfile& a : agents) a.validate(arena);
  const AgentDefaults& d = agent_defaults;
  if (!(d.data_size_bits > 0.0) || !(d.velocity_nominal >= 0.0) ||
      !(d.processing_base_min_s >= 0.0) || d.processing_base_max_s < d.processing_base_min_s ||
      !(d.processing_jitter_s >= 0.0)) {
    throw DomainError("invalid agent defaults");
  }
  if (initial_allocation) {
    if (initial_allocation->size() != num_agents) {
      throw DomainError("initial allocation length differs from num_agents");
    }
    Allocation check(*initial_allocation);
    for (double s : check.shares()) {
      if (s < domain_floor) throw DomainError("initial allocation share below domain_floor");
    }
  }
}

std::vector<AgentProfile> resolve_agents(const ScenarioConfig& config) {
  std::vector<AgentProfile> agents = config.agents;
  if (agents.empty()) {
    const AgentDefaults& d = config.agent_defaults;
    for (std::size_t i = 0; i < config.num_agents; ++i) {
      auto rng = make_stream(config.seed, static_cast<std::uint64_t>(StreamPurpose::kPlacement), i);
      std::uniform_real_distribution<double> coord(0.0, config.arena.side_m);
      std::uniform_real_distribution<double> base(d.processing_base_min_s,
                                                  d.processing_base_max_s);
      AgentProfile a;
      a.data_size_bits = d.data_size_bits;
      a.position = {coord(rng), coord(rng)};
      a.velocity_nominal = d.velocity_nominal;
      a.processing = StochasticDelay{base(rng), d.processing_jitter_s};
      agents.push_back(a);
    }
  }
  if (config.trace_path) {
    auto trace = std::make_shared<const ProcessingTrace>(ProcessingTrace::load_csv(*config.trace_path));
    if (trace->num_agents() < agents.size()) {
      throw DomainError("processing trace has fewer agents than the scenario");
    }
    if (trace->num_rounds() < config.horizon) {
      throw DomainError("processing trace is shorter than the horizon");
    }
    for (std::size_t i = 0; i < agents.size(); ++i) agents[i].processing = TraceDelay{trace, i};
  }
  return agents;
}

EdgeScenarioSource::EdgeScenarioSource(const ScenarioConfig& config)
    : config_(config), profiles_(resolve_agents(config)) {
  config_.validate();
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    walkers_.emplace_back(profiles_[i].position, profiles_[i].velocity_nominal, config_.arena,
                          make_stream(config_.seed,
                                      static_cast<std::uint64_t>(StreamPurpose::kMobility), i));
    processing_streams_.push_back(
        make_stream(config_.seed, static_cast<std::uint64_t>(StreamPurpose::kProcessing), i));
    positions_.push_back(profiles_[i].position);
  }
  processing_.assign(profiles_.size(), 0.0);
}

std::vector<CostFunction> EdgeScenarioSource::costs_for_round(std::size_t round,
                                                              double elapsed_s) {
  if (round != next_round_) throw DomainError("scenario rounds must be generated in order");
  ++next_round_;
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    if (round > 1) positions_[i] = walkers_[i].step(std::max(elapsed_s, kMinMobilityStepSeconds));
    processing_[i] = processing_delay(profiles_[i], round - 1, processing_streams_[i]);
  }
  return make_round_costs(profiles_, positions_, config_.radio, config_.arena, processing_,
                          config_.domain_floor);
}

Environment::Environment(std::unique_ptr<CostSource> source, double tol)
    : source_(std::move(source)), tol_(tol), num_agents_(source_->num_agents()) {
  if (num_agents_ == 0) throw DomainError("cost source has no agents");
}

const RoundEnvironment& Environment::round(std::size_t t) {
  if (t == 0) throw DomainError("rounds are numbered from 1");
  while (rounds_.size() < t) {
    const double elapsed = rounds_.empty() ? 0.0 : rounds_.back().oracle.cost;
    RoundEnvironment r;
    r.costs = source_->costs_for_round(rounds_.size() + 1, elapsed);
    if (r.costs.size() != num_agents_) throw DomainError("cost source changed its agent count");
    r.oracle = dynamic_opt(r.costs, tol_);
    rounds_.push_back(std::move(r));
  }
  return rounds_[t - 1];
}

Environment make_environment(const ScenarioConfig& config) {
  config.validate();
  return Environment(std::make_unique<EdgeScenarioSource>(config), config.bisection_tol);
}

}  // namespace dorasim
