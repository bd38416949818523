#include "dorasim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace dorasim {

std::vector<double> subgradient_max(std::span<const CostFunction> costs,
                                    std::span<const double> shares, double step) {
  const CostVector cv = evaluate_global(costs, shares);
  const std::size_t s = cv.straggler_index;
  const CostFunction& f = costs[s];
  const double x = shares[s];
  if (x < f.domain_floor()) {
    throw DomainError("straggler share is below the domain floor of its cost");
  }
  const double lo = std::max(f.domain_floor(), x - step);
  const double hi = x + step;
  std::vector<double> g(shares.size(), 0.0);
  g[s] = (f.evaluate_unchecked(hi) - f.evaluate_unchecked(lo)) / (hi - lo);
  return g;
}

std::vector<double> project_capped_simplex(std::span<const double> v, double lower,
                                           double budget) {
  const std::size_t n = v.size();
  const double free_budget = budget - static_cast<double>(n) * lower;
  if (free_budget < 0.0) throw DomainError("projection target set is empty");

  std::vector<double> y(n);
  double clamped_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) throw DomainError("cannot project a non-finite point");
    y[i] = std::max(v[i] - lower, 0.0);
    clamped_sum += y[i];
  }
  if (clamped_sum > free_budget) {
    // threshold from the sorted cumulative sums
    std::vector<double> sorted(n);
    for (std::size_t i = 0; i < n; ++i) sorted[i] = v[i] - lower;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cumulative += sorted[j];
      const double candidate = (cumulative - free_budget) / static_cast<double>(j + 1);
      if (sorted[j] - candidate > 0.0) theta = candidate;
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = std::max(v[i] - lower - theta, 0.0);
    // cancellation in v - theta can leave the sum a few ulps of |v| over budget
    const double excess = std::accumulate(y.begin(), y.end(), 0.0) - free_budget;
    if (excess > 0.0) {
      double& largest = *std::max_element(y.begin(), y.end());
      largest = std::max(largest - excess, 0.0);
    }
  }
  for (double& yi : y) yi += lower;
  return y;
}

Allocation project_feasible(std::span<const double> v) {
  return Allocation(project_capped_simplex(v, 0.0, 1.0));
}

Allocation ogd_step(BaselineState& state, std::span<const CostFunction> costs) {
  const auto& x = state.current_alloc.vector();
  const std::vector<double> g = subgradient_max(costs, x);
  std::vector<double> moved(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) moved[i] = x[i] - state.step_size * g[i];
  state.current_alloc = Allocation(project_capped_simplex(moved, state.share_floor, 1.0));
  ++state.round_counter;
  return state.current_alloc;
}

Allocation omd_step(BaselineState& state, std::span<const CostFunction> costs,
                    std::optional<double> divergence_weight) {
  const double weight = divergence_weight.value_or(state.step_size);
  if (!(weight > 0.0)) throw DomainError("divergence weight must be positive");
  const auto& x = state.current_alloc.vector();
  for (double xi : x) {
    if (!(xi > 0.0)) throw DomainError("mirror descent needs strictly positive shares");
  }
  const std::vector<double> g = subgradient_max(costs, x);

  // log-domain normalization keeps large gradients from overflowing
  std::vector<double> log_w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) log_w[i] = std::log(x[i]) - g[i] / weight;
  const double peak = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double& lw : log_w) {
    lw = std::exp(lw - peak);
    total += lw;
  }
  const double n = static_cast<double>(x.size());
  const double spread = 1.0 - n * state.share_floor;
  if (spread < 0.0) throw DomainError("share floor leaves no budget");
  std::vector<double> next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    next[i] = state.share_floor + spread * (log_w[i] / total);
  }
  state.current_alloc = Allocation(std::move(next));
  ++state.round_counter;
  return state.current_alloc;
}

std::vector<double> random_unit_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(n);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& ui : u) {
      ui = normal(rng);
      norm += ui * ui;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& ui : u) ui /= norm;
  return u;
}

std::vector<double> fkm_gradient_estimate(double observed_cost, double delta,
                                          std::span<const double> direction) {
  if (!(delta > 0.0)) throw DomainError("perturbation radius must be positive");
  const double scale = static_cast<double>(direction.size()) / delta * observed_cost;
  std::vector<double> g(direction.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * direction[i];
  return g;
}

ShrunkSet fkm_shrunk_set(std::size_t n, double delta, double share_floor) {
  const double nd = static_cast<double>(n);
  ShrunkSet set{delta + share_floor, 1.0 - delta * std::sqrt(nd)};
  if (!(delta > 0.0) || nd * set.lower > set.budget) {
    throw DomainError("perturbation radius too large for the feasible set");
  }
  return set;
}

Allocation fkm_perturb(BaselineState& state, std::mt19937_64& rng) {
  const auto& x = state.current_alloc.vector();
  const ShrunkSet set = fkm_shrunk_set(x.size(), state.fkm.delta, state.share_floor);
  const double sum = state.current_alloc.sum();
  const double slack = 1e-12;
  for (double xi : x) {
    if (xi < set.lower - slack) throw DomainError("current point lies outside the shrunk set");
  }
  if (sum > set.budget + slack) throw DomainError("current point lies outside the shrunk set");

  state.fkm.last_direction = random_unit_vector(x.size(), rng);
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    v[i] = std::max(x[i] + state.fkm.delta * state.fkm.last_direction[i], state.share_floor);
  }
  return Allocation(std::move(v));
}

Allocation fkm_step(BaselineState& state, double observed_global_cost_at_perturbed_point) {
  const auto& x = state.current_alloc.vector();
  if (state.fkm.last_direction.size() != x.size()) {
    throw DomainError("no perturbation drawn before the gradient step");
  }
  const ShrunkSet set = fkm_shrunk_set(x.size(), state.fkm.delta, state.share_floor);
  const std::vector<double> g = fkm_gradient_estimate(observed_global_cost_at_perturbed_point,
                                                      state.fkm.delta, state.fkm.last_direction);
  std::vector<double> moved(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) moved[i] = x[i] - state.step_size * g[i];
  state.current_alloc = Allocation(project_capped_simplex(moved, set.lower, set.budget));
  ++state.round_counter;
  return state.current_alloc;
}

std::vector<double> linear_minimizer(std::span<const double> gradient) {
  std::vector<double> v(gradient.size(), 0.0);
  if (gradient.empty()) return v;
  const auto best = std::min_element(gradient.begin(), gradient.end());
  if (*best < 0.0) v[static_cast<std::size_t>(best - gradient.begin())] = 1.0;
  return v;
}

Allocation ocg_step(BaselineState& state, std::span<const CostFunction> costs) {
  if (state.round_counter < 1) throw DomainError("round counter must start at 1");
  const auto& x = state.current_alloc.vector();
  const std::vector<double> g = subgradient_max(costs, x);
  if (state.aggregated_gradient.size() != x.size()) state.aggregated_gradient.assign(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) state.aggregated_gradient[i] += g[i];

  const std::vector<double> vertex = linear_minimizer(state.aggregated_gradient);
  const double step = 1.0 / static_cast<double>(state.round_counter);
  std::vector<double> next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] + step * (vertex[i] - x[i]);
  state.current_alloc = Allocation(std::move(next));
  ++state.round_counter;
  return state.current_alloc;
}

Allocation equal_step(std::size_t num_agents) { return Allocation::equal(num_agents); }

namespace {

double inverse_sum(std::span<const CostFunction> costs, double eta, double tol,
                   std::vector<double>* shares) {
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double x = inverse_cost(costs[i], eta, 1.0, tol);
    if (shares) (*shares)[i] = x;
    total += x;
  }
  return total;
}

}  // namespace

OracleSolution dynamic_opt(std::span<const CostFunction> costs, double tol) {
  if (costs.empty()) throw DomainError("no agents to allocate");
  if (!(tol > 0.0)) throw DomainError("oracle tolerance must be positive");
  const std::size_t n = costs.size();

  // No level below the best single-agent cost is reachable; equal shares
  // give a reachable one.
  double eta_lo = 0.0;
  for (const CostFunction& f : costs) eta_lo = std::max(eta_lo, f(1.0));
  double eta_hi = evaluate_global(costs, Allocation::equal(n)).global;
  eta_hi = std::max(eta_hi, eta_lo);

  std::vector<double> shares(n);
  if (inverse_sum(costs, eta_lo, tol, nullptr) <= 1.0) {
    eta_hi = eta_lo;
  } else {
    if (inverse_sum(costs, eta_hi, tol, nullptr) > 1.0 + kFeasibilityEps) {
      throw DomainError("instantaneous problem is infeasible at every searched level");
    }
    for (int it = 0; it < kMaxBisectionIterations && eta_hi - eta_lo > tol; ++it) {
      const double mid = 0.5 * (eta_lo + eta_hi);
      if (mid <= eta_lo || mid >= eta_hi) break;
      if (inverse_sum(costs, mid, tol, nullptr) <= 1.0) {
        eta_hi = mid;
      } else {
        eta_lo = mid;
      }
    }
  }
  const double used = inverse_sum(costs, eta_hi, tol, &shares);
  if (used > 1.0) {
    // rounding at the feasibility edge; shave it off agent 0
    shares[0] = std::max(shares[0] - (used - 1.0), costs[0].domain_floor());
  } else {
    shares[0] += 1.0 - used;
  }
  OracleSolution out{Allocation(std::move(shares)), 0.0};
  out.cost = evaluate_global(costs, out.allocation).global;
  return out;
}

}  // namespace dorasim
