#include "pkgrelax/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pkgrelax/error.hpp"

namespace pkgrelax {

ImprovementValue improvement(const SolveOutcome& original,
                             const SolveOutcome& relaxed) {
  ImprovementValue out;
  if (!original.feasible()) {
    out.baseline_infeasible = true;
    return out;
  }
  if (!relaxed.feasible()) {
    throw ContractError(
        "relaxation of a feasible query reported infeasible");
  }
  const double base = std::abs(original.objective_value);
  double denominator = base;
  if (base < kDenominatorEpsilon) {
    denominator = kDenominatorEpsilon;
    out.degenerate_baseline = true;
  }
  out.value =
      std::abs(original.objective_value - relaxed.objective_value) / denominator;
  return out;
}

double violation_term(double beta, double f) {
  return std::abs(beta - f) / std::max(std::abs(beta), kDenominatorEpsilon);
}

MapeValue mape_error(const PackageQuery& original,
                     const ConstraintSet& removed, const Package& relaxed_pkg,
                     const ItemTable& table) {
  MapeValue out;
  if (original.size() == 0) return out;
  double total = 0.0;
  for (std::size_t i : removed) {
    const Constraint& c = original.constraints().at(i);
    const double f = evaluate_constraint_function(c, relaxed_pkg, table);
    if (compare_within_tolerance(f, c.op, c.beta)) continue;
    out.violated.push_back(i);
    if (std::abs(c.beta) < kDenominatorEpsilon) out.degenerate_bound = true;
    total += violation_term(c.beta, f);
  }
  out.value = total / static_cast<double>(original.size());
  return out;
}

double relaxation_score(double improvement, double error) {
  return (1.0 + improvement) / (1.0 + error);
}

std::vector<std::string> RelaxationScore::flags() const {
  std::vector<std::string> out;
  if (baseline_infeasible) out.emplace_back("baseline_infeasible");
  if (degenerate_baseline) out.emplace_back("degenerate_baseline");
  if (degenerate_bound) out.emplace_back("degenerate_bound");
  return out;
}

RelaxationScore score_relaxation(const PackageQuery& original,
                                 const SolveOutcome& original_outcome,
                                 const ConstraintSet& removed,
                                 const SolveOutcome& relaxed_outcome,
                                 const ItemTable& table) {
  RelaxationScore s;
  const ImprovementValue imp = improvement(original_outcome, relaxed_outcome);
  s.improvement = imp.value;
  s.baseline_infeasible = imp.baseline_infeasible;
  s.degenerate_baseline = imp.degenerate_baseline;
  if (relaxed_outcome.feasible()) {
    MapeValue err =
        mape_error(original, removed, relaxed_outcome.package, table);
    s.error = err.value;
    s.violated = std::move(err.violated);
    s.degenerate_bound = err.degenerate_bound;
  }
  s.score = relaxation_score(s.improvement, s.error);
  return s;
}

}  // namespace pkgrelax
