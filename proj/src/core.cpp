#include "dorasim/core.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace dorasim {

Allocation::Allocation(std::vector<double> shares) : shares_(std::move(shares)) {
  for (std::size_t i = 0; i < shares_.size(); ++i) {
    if (!std::isfinite(shares_[i]) || shares_[i] < 0.0) {
      throw DomainError("allocation share " + std::to_string(i) +
                        " is negative or not finite");
    }
  }
  if (sum() > 1.0 + kFeasibilityEps) {
    throw DomainError("allocation exceeds the unit budget");
  }
}

Allocation Allocation::equal(std::size_t num_agents) {
  if (num_agents == 0) throw DomainError("equal allocation needs at least one agent");
  return Allocation(std::vector<double>(num_agents, 1.0 / static_cast<double>(num_agents)));
}

double Allocation::sum() const {
  return std::accumulate(shares_.begin(), shares_.end(), 0.0);
}

bool is_feasible(std::span<const double> shares, double eps) {
  double total = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0) || !std::isfinite(s)) return false;
    total += s;
  }
  return total <= 1.0 + eps;
}

CostFunction::CostFunction(Evaluator evaluator, double domain_floor,
                           std::optional<double> lipschitz_bound)
    : evaluator_(std::make_shared<const Evaluator>(std::move(evaluator))),
      domain_floor_(domain_floor),
      lipschitz_(lipschitz_bound) {
  if (!*evaluator_) throw DomainError("cost function needs an evaluator");
  if (!(domain_floor >= 0.0)) throw DomainError("domain floor must be non-negative");
  if (lipschitz_ && !(*lipschitz_ >= 0.0)) {
    throw DomainError("Lipschitz bound must be non-negative");
  }
}

double CostFunction::operator()(double share) const {
  if (share < domain_floor_) {
    throw DomainError("share " + std::to_string(share) + " is below the domain floor");
  }
  return (*evaluator_)(share);
}

CostVector evaluate_global(std::span<const CostFunction> costs,
                           std::span<const double> shares) {
  if (costs.size() != shares.size()) {
    throw DomainError("cost/allocation dimension mismatch");
  }
  if (costs.empty()) throw DomainError("no agents to evaluate");
  CostVector out;
  out.per_agent.reserve(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double c = costs[i](shares[i]);
    out.per_agent.push_back(c);
    // strict comparison keeps the lowest index on ties
    if (i == 0 || c > out.global) {
      out.global = c;
      out.straggler_index = i;
    }
  }
  return out;
}

double inverse_cost(const CostFunction& f, double eta, double hi, double tol) {
  if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
  const double floor = f.domain_floor();
  if (hi < floor) throw DomainError("upper bracket lies below the domain floor");

  const double f_hi = f.evaluate_unchecked(hi);
  if (f_hi > eta + tol) {
    throw DomainError("target cost is below the cost achievable at the upper bracket");
  }
  if (f_hi >= eta - tol) return hi;
  if (f.evaluate_unchecked(floor) <= eta) return floor;

  // invariant: f(lo) > eta >= f(up)
  double lo = floor;
  double up = hi;
  for (int it = 0; it < kMaxBisectionIterations; ++it) {
    const double mid = 0.5 * (lo + up);
    if (mid <= lo || mid >= up) break;
    const double f_mid = f.evaluate_unchecked(mid);
    if (std::abs(f_mid - eta) <= tol) return mid;
    if (f_mid > eta) {
      lo = mid;
    } else {
      up = mid;
    }
  }
  return up;
}

}  // namespace dorasim
