#include "dorasim/reallocation.hpp"

#include <numeric>
#include <string>

namespace dorasim {

void DoraState::validate() const {
  if (!(step_size > 0.0 && step_size < 1.0)) {
    throw DomainError("step size must lie in (0, 1)");
  }
  if (prev_costs.per_agent.size() != prev_alloc.size()) {
    throw DomainError("previous costs do not match the previous allocation");
  }
  if (prev_alloc.size() == 0) throw DomainError("state has no agents");
}

double UpdateDirection::squared_norm() const {
  return std::inner_product(components.begin(), components.end(), components.begin(), 0.0);
}

double UpdateDirection::sum() const {
  return std::accumulate(components.begin(), components.end(), 0.0);
}

double relinquish_target(const CostFunction& f_prev, double prev_share,
                         double prev_global_cost, double tol) {
  return inverse_cost(f_prev, prev_global_cost, prev_share, tol);
}

double agent_update(const DoraState& state, std::size_t agent, const CostFunction& f_prev,
                    double tol) {
  const double share = state.prev_alloc[agent];
  const double target = relinquish_target(f_prev, share, state.prev_costs.global, tol);
  return share - state.step_size * (share - target);
}

Allocation server_reallocate(std::span<const double> partial, std::size_t straggler_prev) {
  if (straggler_prev >= partial.size()) throw DomainError("straggler index out of range");
  double others = 0.0;
  for (std::size_t i = 0; i < partial.size(); ++i) {
    if (i == straggler_prev) continue;
    if (!(partial[i] >= 0.0 && partial[i] <= 1.0)) {
      throw DomainError("agent " + std::to_string(i) + " sent a share outside [0, 1]");
    }
    others += partial[i];
  }
  if (others > 1.0 + kFeasibilityEps) {
    throw DomainError("non-straggler shares exceed the budget");
  }
  std::vector<double> shares(partial.begin(), partial.end());
  shares[straggler_prev] = others >= 1.0 ? 0.0 : 1.0 - others;
  return Allocation(std::move(shares));
}

DoraRoundResult dora_round(const DoraState& state, std::span<const CostFunction> observed,
                           double tol) {
  state.validate();
  const std::size_t n = state.prev_alloc.size();
  if (observed.size() != n) throw DomainError("observation count does not match agent count");

  DoraRoundResult out;
  out.relinquish_targets.resize(n);
  std::vector<double> partial(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double share = state.prev_alloc[i];
    out.relinquish_targets[i] =
        relinquish_target(observed[i], share, state.prev_costs.global, tol);
    ++out.bisection_calls;
    partial[i] = share - state.step_size * (share - out.relinquish_targets[i]);
  }
  out.allocation = server_reallocate(partial, state.prev_costs.straggler_index);
  return out;
}

UpdateDirection update_direction(std::span<const double> shares,
                                 std::span<const double> relinquish_targets,
                                 std::size_t straggler) {
  if (shares.size() != relinquish_targets.size()) {
    throw DomainError("targets do not match the allocation dimension");
  }
  if (straggler >= shares.size()) throw DomainError("straggler index out of range");
  UpdateDirection g;
  g.components.assign(shares.size(), 0.0);
  double relinquished = 0.0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (i == straggler) continue;
    if (relinquish_targets[i] > shares[i]) {
      throw DomainError("relinquish target exceeds the current share");
    }
    g.components[i] = shares[i] - relinquish_targets[i];
    relinquished += g.components[i];
  }
  g.components[straggler] = -relinquished;
  return g;
}

}  // namespace dorasim
