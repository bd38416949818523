#pragma once

// Round-by-round allocation policies behind one interface. A policy deciding
// round t only ever sees what was revealed at the end of round t-1.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dorasim/baselines.hpp"
#include "dorasim/core.hpp"
#include "dorasim/reallocation.hpp"

namespace dorasim {

/// What the end of a round reveals.
struct Observation {
  std::size_t round = 0;
  std::span<const CostFunction> costs;
  const Allocation* played = nullptr;
  const CostVector* outcome = nullptr;
};

struct DecisionContext {
  std::size_t round = 1;                           // round being decided, from 1
  const Observation* previous = nullptr;           // null in round 1
  const OracleSolution* current_optimum = nullptr;  // clairvoyant policies only
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  /// Clairvoyant policies are handed the current round's optimum.
  virtual bool clairvoyant() const { return false; }
  virtual Allocation decide(const DecisionContext& ctx) = 0;
};

struct PolicyParams {
  std::size_t num_agents = 5;
  double step_size = 0.02;
  double share_floor = kDefaultDomainFloor;
  double tol = kDefaultBisectionTol;
  double fkm_delta = kDefaultFkmDelta;
  std::optional<double> omd_divergence_weight;
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> initial_allocation;
};

inline constexpr std::string_view kDora = "dora";
inline constexpr std::string_view kEqual = "equal";
inline constexpr std::string_view kOgd = "ogd-omm";
inline constexpr std::string_view kOmd = "omd";
inline constexpr std::string_view kFkm = "fkm";
inline constexpr std::string_view kOcg = "ocg";
inline constexpr std::string_view kDynamicOpt = "dynamic-opt";

/// Every policy name accepted by make_policy, in report order.
std::span<const std::string_view> policy_names();
bool is_policy_name(std::string_view name);

/// Throws DomainError listing the valid names when `name` is unknown.
std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyParams& params);

class DoraPolicy final : public Policy {
 public:
  explicit DoraPolicy(const PolicyParams& params);
  std::string_view name() const override { return kDora; }
  Allocation decide(const DecisionContext& ctx) override;

  /// Targets and bisection count of the most recent update (empty in round 1).
  const std::optional<DoraRoundResult>& last_round() const { return last_; }

 private:
  Allocation initial_;
  double step_size_;
  double tol_;
  std::optional<DoraRoundResult> last_;
};

/// Radius actually used by FKM: the configured one, capped so the interior
/// set stays non-empty for n agents.
double effective_fkm_delta(std::size_t num_agents, double requested, double share_floor);

}  // namespace dorasim
