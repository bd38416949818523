#pragma once

// Distributed online resource re-allocation. Each agent relinquishes part of
// the share it could give up without becoming the straggler of the previous
// round; the server hands everything relinquished to that straggler.

#include <cstddef>
#include <span>
#include <vector>

#include "dorasim/core.hpp"

namespace dorasim {

/// What the agents and the server remember from round t-1.
struct DoraState {
  Allocation prev_alloc;
  CostVector prev_costs;  // costs incurred at prev_alloc
  double step_size = 0.02;

  /// Throws DomainError unless 0 < step_size < 1 and the cost vector matches
  /// the allocation's dimension.
  void validate() const;
};

/// Direction G with x_next = x - step * G. Components sum to zero.
struct UpdateDirection {
  std::vector<double> components;

  double squared_norm() const;
  double sum() const;
};

/// Smallest share agent i could have kept last round without its cost
/// exceeding that round's global cost.
double relinquish_target(const CostFunction& f_prev, double prev_share,
                         double prev_global_cost, double tol = kDefaultBisectionTol);

/// Agent-side move toward its relinquish target: x - step * (x - x').
double agent_update(const DoraState& state, std::size_t agent, const CostFunction& f_prev,
                    double tol = kDefaultBisectionTol);

/// Server-side step: the previous straggler receives whatever the other
/// agents left in the budget. Throws when the other shares already exceed it.
Allocation server_reallocate(std::span<const double> partial, std::size_t straggler_prev);

struct DoraRoundResult {
  Allocation allocation;
  std::vector<double> relinquish_targets;
  std::size_t bisection_calls = 0;
};

/// One full round: every agent update followed by the server re-allocation.
/// The next state is formed from `allocation` and the costs it incurs.
DoraRoundResult dora_round(const DoraState& state, std::span<const CostFunction> observed,
                           double tol = kDefaultBisectionTol);

UpdateDirection update_direction(std::span<const double> shares,
                                 std::span<const double> relinquish_targets,
                                 std::size_t straggler);

}  // namespace dorasim
