#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dorasim/baselines.hpp"
#include "dorasim/core.hpp"
#include "dorasim/cost_model.hpp"

namespace dorasim {

/// How agents are generated when the scenario does not list them.
struct AgentDefaults {
  double data_size_bits = kDefaultPayloadBits;
  double velocity_nominal = 0.0;
  double processing_base_min_s = 0.05;
  double processing_base_max_s = 0.25;
  double processing_jitter_s = 0.02;
};

struct ScenarioConfig {
  std::size_t num_agents = 5;
  std::size_t horizon = 470;
  double step_size = 0.02;
  std::string algorithm = "dora";
  RadioParams radio;
  ArenaConfig arena;
  AgentDefaults agent_defaults;
  /// Explicit agents; when empty, num_agents are placed uniformly at random.
  std::vector<AgentProfile> agents;
  /// Optional processing-delay trace; column i feeds agent i.
  std::optional<std::string> trace_path;
  std::optional<std::vector<double>> initial_allocation;
  std::uint64_t seed = 1;
  double bisection_tol = kDefaultBisectionTol;
  double domain_floor = kDefaultDomainFloor;
  double fkm_delta = kDefaultFkmDelta;
  /// Mirror-descent divergence weight; unset means step_size.
  std::optional<double> omd_divergence_weight;
  bool checks = true;

  /// Throws DomainError on an invalid configuration.
  void validate() const;
};

/// Source of per-round cost functions. Rounds are requested in order 1..T;
/// `elapsed_s` is the duration of the previous round.
class CostSource {
 public:
  virtual ~CostSource() = default;
  virtual std::size_t num_agents() const = 0;
  virtual std::vector<CostFunction> costs_for_round(std::size_t round, double elapsed_s) = 0;
};

/// Edge-learning scenario: mobility, path-loss channels and processing delays
/// drawn from per-agent streams of the master seed.
class EdgeScenarioSource final : public CostSource {
 public:
  explicit EdgeScenarioSource(const ScenarioConfig& config);

  std::size_t num_agents() const override { return profiles_.size(); }
  std::vector<CostFunction> costs_for_round(std::size_t round, double elapsed_s) override;

  const std::vector<AgentProfile>& profiles() const { return profiles_; }
  const std::vector<Position>& positions() const { return positions_; }
  const std::vector<double>& last_processing_delays() const { return processing_; }

 private:
  ScenarioConfig config_;
  std::vector<AgentProfile> profiles_;
  std::vector<WaypointWalker> walkers_;
  std::vector<std::mt19937_64> processing_streams_;
  std::vector<Position> positions_;
  std::vector<double> processing_;
  std::size_t next_round_ = 1;
};

/// Agents of the scenario: the explicit list, or generated ones.
std::vector<AgentProfile> resolve_agents(const ScenarioConfig& config);

struct RoundEnvironment {
  std::vector<CostFunction> costs;
  OracleSolution oracle;
};

/// Lazily materialized cost stream with its per-round optimum. Rounds are
/// generated on first access and cached, so several policies can replay the
/// identical stream.
class Environment {
 public:
  Environment(std::unique_ptr<CostSource> source, double tol);

  std::size_t num_agents() const { return num_agents_; }
  std::size_t generated_rounds() const { return rounds_.size(); }
  /// Round t >= 1. Generates every round up to t if needed.
  const RoundEnvironment& round(std::size_t t);

 private:
  std::unique_ptr<CostSource> source_;
  double tol_;
  std::size_t num_agents_;
  std::deque<RoundEnvironment> rounds_;  // stable references
};

Environment make_environment(const ScenarioConfig& config);

}  // namespace dorasim
