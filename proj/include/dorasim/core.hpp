#pragma once

// Allocations, per-agent cost functions and the monotone inverse used by
// every allocation policy.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dorasim {

/// Feasibility slack on the unit budget.
inline constexpr double kFeasibilityEps = 1e-9;
/// Smallest admissible share for costs that diverge at zero.
inline constexpr double kDefaultDomainFloor = 1e-9;
inline constexpr double kDefaultBisectionTol = 1e-10;
inline constexpr int kMaxBisectionIterations = 200;

/// Raised for violated preconditions (dimension mismatch, bad tolerance,
/// corrupted agent messages, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-agent resource shares under a budget normalized to one.
class Allocation {
 public:
  Allocation() = default;
  /// Throws DomainError when a share is negative or not finite, or when the
  /// shares sum to more than 1 + kFeasibilityEps.
  explicit Allocation(std::vector<double> shares);

  static Allocation equal(std::size_t num_agents);

  std::span<const double> shares() const { return shares_; }
  const std::vector<double>& vector() const { return shares_; }
  std::size_t size() const { return shares_.size(); }
  double operator[](std::size_t i) const { return shares_[i]; }
  double sum() const;

  friend bool operator==(const Allocation&, const Allocation&) = default;

 private:
  std::vector<double> shares_;
};

/// True when every share is >= 0 and the shares sum to at most 1 + eps.
bool is_feasible(std::span<const double> shares, double eps = kFeasibilityEps);

/// A monotone non-increasing map from share to cost. Cheap to copy; the
/// evaluator is shared.
class CostFunction {
 public:
  using Evaluator = std::function<double(double)>;

  CostFunction(Evaluator evaluator, double domain_floor = 0.0,
               std::optional<double> lipschitz_bound = std::nullopt);

  /// Throws DomainError for shares below the domain floor.
  double operator()(double share) const;
  double evaluate_unchecked(double share) const { return (*evaluator_)(share); }

  double domain_floor() const { return domain_floor_; }
  const std::optional<double>& lipschitz_bound() const { return lipschitz_; }

 private:
  std::shared_ptr<const Evaluator> evaluator_;
  double domain_floor_;
  std::optional<double> lipschitz_;
};

struct CostVector {
  std::vector<double> per_agent;
  double global = 0.0;
  std::size_t straggler_index = 0;
};

/// Per-agent costs, their maximum and the lowest index attaining it.
CostVector evaluate_global(std::span<const CostFunction> costs,
                           std::span<const double> shares);
inline CostVector evaluate_global(std::span<const CostFunction> costs,
                                  const Allocation& alloc) {
  return evaluate_global(costs, alloc.shares());
}

/// Smallest share x' in [domain_floor, hi] whose cost does not exceed `eta`,
/// located by bisection to within `tol` in cost units. Returns hi when f(hi)
/// is already within tol of eta and domain_floor when even the floor meets
/// the target. The returned point always satisfies f(x') <= eta + tol.
double inverse_cost(const CostFunction& f, double eta, double hi,
                    double tol = kDefaultBisectionTol);

}  // namespace dorasim
