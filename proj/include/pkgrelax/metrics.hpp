#pragma once

#include <string>
#include <vector>

#include "pkgrelax/model.hpp"

namespace pkgrelax {

// Guard for zero denominators in the improvement and error ratios.
inline constexpr double kDenominatorEpsilon = 1e-12;

struct ImprovementValue {
  double value = 0.0;
  bool baseline_infeasible = false;  // original had no package; value is 0
  bool degenerate_baseline = false;  // |F(Q)| < epsilon; epsilon used instead
};

// |F(Q) - F(Q')| / max(|F(Q)|, eps). An infeasible original yields 0 with
// baseline_infeasible set. Throws ContractError when the original is feasible
// and the relaxed one is not.
ImprovementValue improvement(const SolveOutcome& original,
                             const SolveOutcome& relaxed);

struct MapeValue {
  double value = 0.0;
  std::vector<std::size_t> violated;  // removed indices the package violates
  bool degenerate_bound = false;      // some violated term had |beta| < eps
};

// Per-constraint violation term |beta - f| / max(|beta|, eps).
double violation_term(double beta, double f);

// Mean absolute percentage error of `relaxed_pkg` over the removed
// constraints of `original`, averaged over all |C| original constraints.
// Only removed constraints that the package violates contribute.
MapeValue mape_error(const PackageQuery& original,
                     const ConstraintSet& removed, const Package& relaxed_pkg,
                     const ItemTable& table);

// (1 + improvement) / (1 + error).
double relaxation_score(double improvement, double error);

struct RelaxationScore {
  double improvement = 0.0;
  double error = 0.0;
  double score = 1.0;
  std::vector<std::size_t> violated;
  bool baseline_infeasible = false;
  bool degenerate_baseline = false;
  bool degenerate_bound = false;

  std::vector<std::string> flags() const;
};

// Scores the relaxation of `original` that drops `removed`, given both
// solved outcomes. When the relaxed outcome is infeasible (possible only for
// an infeasible original) the error is 0.
RelaxationScore score_relaxation(const PackageQuery& original,
                                 const SolveOutcome& original_outcome,
                                 const ConstraintSet& removed,
                                 const SolveOutcome& relaxed_outcome,
                                 const ItemTable& table);

}  // namespace pkgrelax
