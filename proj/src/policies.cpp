#include "dorasim/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dorasim/cost_model.hpp"

namespace dorasim {

namespace {

constexpr std::array<std::string_view, 7> kNames = {kDora, kEqual, kOgd, kOmd,
                                                    kFkm,  kOcg,   kDynamicOpt};

Allocation initial_allocation(const PolicyParams& p) {
  if (p.initial_allocation) return Allocation(*p.initial_allocation);
  return Allocation::equal(p.num_agents);
}

BaselineState initial_state(const PolicyParams& p) {
  BaselineState s;
  s.current_alloc = initial_allocation(p);
  s.step_size = p.step_size;
  s.share_floor = p.share_floor;
  s.aggregated_gradient.assign(p.num_agents, 0.0);
  return s;
}

class EqualPolicy final : public Policy {
 public:
  explicit EqualPolicy(const PolicyParams& p) : n_(p.num_agents) {}
  std::string_view name() const override { return kEqual; }
  Allocation decide(const DecisionContext&) override { return equal_step(n_); }

 private:
  std::size_t n_;
};

// Shared shape of the first-order baselines: replay the start point in round
// 1, then one update per revealed round.
class GradientPolicy : public Policy {
 public:
  explicit GradientPolicy(const PolicyParams& p) : state_(initial_state(p)) {}

  Allocation decide(const DecisionContext& ctx) override {
    if (!ctx.previous) return state_.current_alloc;
    state_.round_counter = ctx.round;
    return update(ctx.previous->costs);
  }

 protected:
  virtual Allocation update(std::span<const CostFunction> costs) = 0;
  BaselineState state_;
};

class OgdPolicy final : public GradientPolicy {
 public:
  using GradientPolicy::GradientPolicy;
  std::string_view name() const override { return kOgd; }

 private:
  Allocation update(std::span<const CostFunction> costs) override {
    return ogd_step(state_, costs);
  }
};

class OmdPolicy final : public GradientPolicy {
 public:
  explicit OmdPolicy(const PolicyParams& p)
      : GradientPolicy(p), weight_(p.omd_divergence_weight) {}
  std::string_view name() const override { return kOmd; }

 private:
  Allocation update(std::span<const CostFunction> costs) override {
    return omd_step(state_, costs, weight_);
  }
  std::optional<double> weight_;
};

class OcgPolicy final : public GradientPolicy {
 public:
  using GradientPolicy::GradientPolicy;
  std::string_view name() const override { return kOcg; }

 private:
  Allocation update(std::span<const CostFunction> costs) override {
    return ocg_step(state_, costs);
  }
};

class FkmPolicy final : public Policy {
 public:
  explicit FkmPolicy(const PolicyParams& p)
      : state_(initial_state(p)),
        rng_(make_stream(p.seed, static_cast<std::uint64_t>(StreamPurpose::kPolicy), 0)) {
    state_.fkm.delta = effective_fkm_delta(p.num_agents, p.fkm_delta, p.share_floor);
    const ShrunkSet set = fkm_shrunk_set(p.num_agents, state_.fkm.delta, p.share_floor);
    state_.current_alloc =
        Allocation(project_capped_simplex(state_.current_alloc.vector(), set.lower, set.budget));
  }
  std::string_view name() const override { return kFkm; }

  Allocation decide(const DecisionContext& ctx) override {
    if (ctx.previous) {
      state_.round_counter = ctx.round;
      fkm_step(state_, ctx.previous->outcome->global);
    }
    return fkm_perturb(state_, rng_);
  }

 private:
  BaselineState state_;
  std::mt19937_64 rng_;
};

class DynamicOptPolicy final : public Policy {
 public:
  std::string_view name() const override { return kDynamicOpt; }
  bool clairvoyant() const override { return true; }
  Allocation decide(const DecisionContext& ctx) override {
    if (!ctx.current_optimum) throw DomainError("dynamic-opt needs the current round's optimum");
    return ctx.current_optimum->allocation;
  }
};

}  // namespace

std::span<const std::string_view> policy_names() { return kNames; }

bool is_policy_name(std::string_view name) {
  return std::find(kNames.begin(), kNames.end(), name) != kNames.end();
}

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyParams& params) {
  if (params.num_agents < 1) throw DomainError("policy needs at least one agent");
  if (name == kDora) return std::make_unique<DoraPolicy>(params);
  if (name == kEqual) return std::make_unique<EqualPolicy>(params);
  if (name == kOgd) return std::make_unique<OgdPolicy>(params);
  if (name == kOmd) return std::make_unique<OmdPolicy>(params);
  if (name == kFkm) return std::make_unique<FkmPolicy>(params);
  if (name == kOcg) return std::make_unique<OcgPolicy>(params);
  if (name == kDynamicOpt) return std::make_unique<DynamicOptPolicy>();
  std::string valid;
  for (std::string_view n : kNames) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw DomainError("unknown policy '" + std::string(name) + "' (valid: " + valid + ")");
}

DoraPolicy::DoraPolicy(const PolicyParams& params)
    : initial_(initial_allocation(params)), step_size_(params.step_size), tol_(params.tol) {
  if (!(step_size_ > 0.0 && step_size_ < 1.0)) throw DomainError("step size must lie in (0, 1)");
}

Allocation DoraPolicy::decide(const DecisionContext& ctx) {
  if (!ctx.previous) {
    last_.reset();
    return initial_;
  }
  const DoraState state{*ctx.previous->played, *ctx.previous->outcome, step_size_};
  last_ = dora_round(state, ctx.previous->costs, tol_);
  return last_->allocation;
}

double effective_fkm_delta(std::size_t num_agents, double requested, double share_floor) {
  const double n = static_cast<double>(num_agents);
  // half of the largest radius whose interior set is non-empty
  const double cap = 0.5 * (1.0 - n * share_floor) / (n + std::sqrt(n));
  return std::min(requested, cap);
}

}  // namespace dorasim
