#pragma once

// Comparison policies: projected subgradient descent on the max cost,
// entropic mirror descent, one-point bandit gradient descent, online
// conditional gradient, equal sharing, and the per-round exact optimum.

#include <cstddef>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "dorasim/core.hpp"

namespace dorasim {

inline constexpr double kFiniteDifferenceStep = 1e-6;
inline constexpr double kDefaultFkmDelta = 0.05;

struct FkmPerturbation {
  double delta = kDefaultFkmDelta;
  std::vector<double> last_direction;  // unit vector u of the last perturbation
};

struct BaselineState {
  Allocation current_alloc;
  std::vector<double> aggregated_gradient;  // OCG only
  std::size_t round_counter = 1;
  double step_size = 0.02;
  // Lower bound kept on every share so that costs diverging at zero stay
  // finite. Zero reproduces the plain feasible set.
  double share_floor = 0.0;
  FkmPerturbation fkm;
};

/// Subgradient of max_i f_i(x_i): the straggler's finite-difference slope on
/// its own coordinate, zero elsewhere.
std::vector<double> subgradient_max(std::span<const CostFunction> costs,
                                    std::span<const double> shares,
                                    double step = kFiniteDifferenceStep);

/// Euclidean projection onto {x >= lower, sum(x) <= budget}. Throws when the
/// set is empty (n * lower > budget).
std::vector<double> project_capped_simplex(std::span<const double> v, double lower = 0.0,
                                           double budget = 1.0);

/// Euclidean projection onto {x >= 0, sum(x) <= 1}.
Allocation project_feasible(std::span<const double> v);

Allocation ogd_step(BaselineState& state, std::span<const CostFunction> costs);

/// Entropic mirror step x_i <- x_i exp(-g_i / weight), renormalized. The
/// divergence weight defaults to the state's step size.
Allocation omd_step(BaselineState& state, std::span<const CostFunction> costs,
                    std::optional<double> divergence_weight = std::nullopt);

/// Uniformly distributed unit vector in R^n.
std::vector<double> random_unit_vector(std::size_t n, std::mt19937_64& rng);

/// One-point estimate (n / delta) * f(v) * u.
std::vector<double> fkm_gradient_estimate(double observed_cost, double delta,
                                          std::span<const double> direction);

/// Bounds of the FKM interior set {x_i >= lower, sum(x) <= budget}, chosen so
/// that every point of it stays feasible under a delta-perturbation.
struct ShrunkSet {
  double lower;
  double budget;
};
ShrunkSet fkm_shrunk_set(std::size_t n, double delta, double share_floor);

/// Draws u, stores it in the state and returns the point to play, x + delta u.
/// Throws when the current point is not inside the shrunk set.
Allocation fkm_perturb(BaselineState& state, std::mt19937_64& rng);

/// Gradient step from the global cost observed at the last perturbed point.
Allocation fkm_step(BaselineState& state, double observed_global_cost_at_perturbed_point);

/// Vertex of {x >= 0, sum(x) <= 1} minimizing <x, gradient>.
std::vector<double> linear_minimizer(std::span<const double> gradient);

Allocation ocg_step(BaselineState& state, std::span<const CostFunction> costs);

Allocation equal_step(std::size_t num_agents);

struct OracleSolution {
  Allocation allocation;
  double cost = 0.0;
};

/// Exact min-max allocation for monotone costs, found by bisection on the
/// epigraph level. Slack left by the inverses goes to agent 0.
OracleSolution dynamic_opt(std::span<const CostFunction> costs,
                           double tol = kDefaultBisectionTol);

}  // namespace dorasim
