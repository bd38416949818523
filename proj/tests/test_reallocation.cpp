#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "dorasim/baselines.hpp"
#include "dorasim/core.hpp"
#include "dorasim/reallocation.hpp"

using namespace dorasim;

namespace {

CostFunction inv(double d) {
  return CostFunction([d](double x) { return d / x; }, 1e-9);
}

DoraState state_at(const std::vector<CostFunction>& costs, std::vector<double> shares,
                   double alpha) {
  Allocation a(std::move(shares));
  return DoraState{a, evaluate_global(costs, a), alpha};
}

std::vector<double> random_shares(std::mt19937_64& rng, std::size_t n) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& wi : w) {
    wi = g(rng) + 1e-3;
    total += wi;
  }
  for (double& wi : w) wi /= total;
  return w;
}

}  // namespace

TEST_CASE("state validation") {
  const std::vector<CostFunction> costs = {inv(1.0), inv(2.0)};
  CHECK_NOTHROW(state_at(costs, {0.5, 0.5}, 0.5).validate());
  CHECK_THROWS_AS(state_at(costs, {0.5, 0.5}, 0.0).validate(), DomainError);
  CHECK_THROWS_AS(state_at(costs, {0.5, 0.5}, 1.0).validate(), DomainError);
  DoraState bad = state_at(costs, {0.5, 0.5}, 0.5);
  bad.prev_costs.per_agent.pop_back();
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("agent_update examples") {
  // x' = 0.2 for f = 0.2 / x at global cost 1
  const std::vector<CostFunction> costs = {CostFunction([](double x) { return 0.2 / x; }, 1e-9),
                                           CostFunction([](double x) { return 0.6 / x; }, 1e-9)};
  const DoraState s = state_at(costs, {0.4, 0.6}, 0.5);
  CHECK(s.prev_costs.global == doctest::Approx(1.0));
  CHECK(agent_update(s, 0, costs[0]) == doctest::Approx(0.3).epsilon(1e-9));
  // the straggler keeps its share
  CHECK(agent_update(s, 1, costs[1]) == 0.6);

  const std::vector<CostFunction> hyper = {inv(1.0), inv(2.0)};
  const DoraState h = state_at(hyper, {0.5, 0.5}, 0.5);
  CHECK(h.prev_costs.global == doctest::Approx(4.0));
  CHECK(relinquish_target(hyper[0], 0.5, 4.0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(agent_update(h, 0, hyper[0]) == doctest::Approx(0.375).epsilon(1e-9));
}

TEST_CASE("server_reallocate examples") {
  const Allocation a = server_reallocate(std::vector<double>{0.3, 0.2, 0.0}, 2);
  CHECK(a[0] == 0.3);
  CHECK(a[1] == 0.2);
  CHECK(a[2] == doctest::Approx(0.5));
  const Allocation b = server_reallocate(std::vector<double>{0.375, 0.5}, 1);
  CHECK(b[1] == doctest::Approx(0.625));
  CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("server_reallocate rejects corrupted messages") {
  CHECK_THROWS_AS(server_reallocate(std::vector<double>{0.7, 0.6, 0.1}, 2), DomainError);
  CHECK_THROWS_AS(server_reallocate(std::vector<double>{-0.1, 0.5}, 1), DomainError);
  CHECK_THROWS_AS(server_reallocate(std::vector<double>{1.5, 0.0}, 1), DomainError);
  CHECK_THROWS_AS(server_reallocate(std::vector<double>{0.5, 0.5}, 2), DomainError);
}

TEST_CASE("no relinquishment leaves the allocation unchanged") {
  // identical agents at equal shares: every target equals its share
  const std::vector<CostFunction> costs(4, inv(1.0));
  DoraState s = state_at(costs, {0.25, 0.25, 0.25, 0.25}, 0.3);
  for (int t = 0; t < 20; ++t) {
    const DoraRoundResult r = dora_round(s, costs);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r.allocation[i] == doctest::Approx(0.25));
    s = DoraState{r.allocation, evaluate_global(costs, r.allocation), s.step_size};
  }
}

TEST_CASE("dora_round two-agent example and convergence") {
  const std::vector<CostFunction> costs = {inv(1.0), inv(2.0)};
  DoraState s = state_at(costs, {0.5, 0.5}, 0.5);
  DoraRoundResult r = dora_round(s, costs);
  CHECK(r.allocation[0] == doctest::Approx(0.375).epsilon(1e-9));
  CHECK(r.allocation[1] == doctest::Approx(0.625).epsilon(1e-9));
  CHECK(r.bisection_calls == 2);

  const OracleSolution opt = dynamic_opt(costs);
  double prev_gap = std::abs(r.allocation[0] - opt.allocation[0]);
  for (int t = 0; t < 60; ++t) {
    s = DoraState{r.allocation, evaluate_global(costs, r.allocation), s.step_size};
    r = dora_round(s, costs);
    const double gap = std::abs(r.allocation[0] - opt.allocation[0]);
    CHECK(gap <= prev_gap + 1e-12);
    prev_gap = gap;
  }
  CHECK(r.allocation[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(r.allocation[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("an initial allocation below the budget is topped up by the first round") {
  const std::vector<CostFunction> costs = {inv(1.0), inv(2.0)};
  const DoraState s = state_at(costs, {0.3, 0.3}, 0.1);
  const DoraRoundResult r = dora_round(s, costs);
  CHECK(r.allocation.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("update_direction examples") {
  const UpdateDirection zero =
      update_direction(std::vector<double>{0.2, 0.8}, std::vector<double>{0.2, 0.8}, 1);
  CHECK(zero.squared_norm() == 0.0);
  const UpdateDirection g =
      update_direction(std::vector<double>{0.5, 0.5}, std::vector<double>{0.25, 0.5}, 1);
  CHECK(g.components[0] == doctest::Approx(0.25));
  CHECK(g.components[1] == doctest::Approx(-0.25));
  CHECK_THROWS_AS(
      update_direction(std::vector<double>{0.5, 0.5}, std::vector<double>{0.6, 0.5}, 1),
      DomainError);
  CHECK_THROWS_AS(update_direction(std::vector<double>{0.5}, std::vector<double>{0.5, 0.5}, 0),
                  DomainError);
}

TEST_CASE("the direction norm can exceed one") {
  const UpdateDirection g = update_direction(std::vector<double>{0.45, 0.45, 0.1},
                                             std::vector<double>{0.0, 0.0, 0.1}, 2);
  CHECK(g.squared_norm() == doctest::Approx(0.2025 * 2 + 0.81));
  CHECK(g.squared_norm() > 1.0);
}

TEST_CASE("round properties on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coef(0.05, 3.0);
  std::uniform_real_distribution<double> step(0.01, 0.99);
  std::uniform_int_distribution<std::size_t> size(2, 12);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = size(rng);
    std::vector<CostFunction> costs;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = coef(rng);
      const double p = coef(rng) * 0.1;
      costs.emplace_back([c, p](double x) { return c / x + p; }, 1e-9);
    }
    const DoraState s = state_at(costs, random_shares(rng, n), step(rng));
    const DoraRoundResult r = dora_round(s, costs);
    const std::size_t st = s.prev_costs.straggler_index;

    // budget conservation
    CHECK(std::abs(r.allocation.sum() - 1.0) <= kFeasibilityEps);
    for (double x : r.allocation.shares()) CHECK(x >= 0.0);
    // O(N) work
    CHECK(r.bisection_calls == n);
    // relinquish bound and straggler receipt
    for (std::size_t i = 0; i < n; ++i) CHECK(r.relinquish_targets[i] <= s.prev_alloc[i]);
    CHECK(r.allocation[st] >= s.prev_alloc[st]);

    const UpdateDirection g = update_direction(s.prev_alloc.shares(), r.relinquish_targets, st);
    CHECK(std::abs(g.sum()) <= 1e-12);
    // the straggler entry repeats the whole relinquished mass
    CHECK(g.squared_norm() <= 2.0 * std::pow(1.0 - s.prev_alloc[st], 2) + 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(r.allocation[i] - (s.prev_alloc[i] - s.step_size * g.components[i])) <=
            1e-12);
    }
  }
}
