#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pkgrelax/metrics.hpp"
#include "pkgrelax/model.hpp"
#include "pkgrelax/solver.hpp"

namespace pkgrelax {

// Percentage of constraints to remove.
class RelaxationLevel {
 public:
  // Throws ContractError unless 0 <= k <= 100.
  explicit RelaxationLevel(int k);

  int k() const { return k_; }

  // round-half-up(n * (100 - k) / 100), lowered to n - 1 when k > 0 would
  // otherwise remove nothing.
  std::size_t retained(std::size_t n) const;
  std::size_t removals(std::size_t n) const { return n - retained(n); }

 private:
  int k_;
};

// Multiplicative bias per constraint kind on the greedy selection value.
// Higher weight makes constraints of that kind likelier to be relaxed.
struct PriorityWeights {
  double base = 1.0;
  double global = 1.0;
  double cardinality = 1.0;

  double of(ConstraintKind kind) const;
  // Throws ContractError unless every weight is finite and > 0.
  void validate() const;
};

enum class Criterion { kImprovement, kImprovementError };

struct RelaxationResult {
  ConstraintSet removed;
  // Constraints in the order a greedy method removed (or, building up from
  // the empty set, added) them. Empty for exhaustive and random search.
  std::vector<std::size_t> sequence;
  SolveOutcome outcome;
  RelaxationScore metrics;  // always measured against the original query
  std::uint64_t solver_calls = 0;
  std::chrono::nanoseconds wall_time{0};
};

// Relaxation searches over one query. The original query is solved once on
// construction; that solve is not counted in any result's solver_calls.
class Relaxer {
 public:
  Relaxer(PackageQuery q, const ItemTable& table, SolverConfig cfg = {});

  const PackageQuery& query() const { return q_; }
  const SolveOutcome& baseline() const { return baseline_; }

  // Best removal of exactly level.removals(|C|) constraints. Ties on the
  // primary criterion go to the other metric, then to the lexicographically
  // smallest removed set.
  RelaxationResult exhaustive(RelaxationLevel level, Criterion criterion) const;
  RelaxationResult exhaustive_i(RelaxationLevel level) const {
    return exhaustive(level, Criterion::kImprovement);
  }
  RelaxationResult exhaustive_ie(RelaxationLevel level) const {
    return exhaustive(level, Criterion::kImprovementError);
  }

  // Uniformly random removal sets of the level's size, one per trial.
  std::vector<RelaxationResult> random(RelaxationLevel level, int trials,
                                       std::uint64_t seed) const;

  // Removes one constraint at a time, each time the one whose removal
  // maximizes weight(kind) * value, where value is the improvement over the
  // previous iterate (criterion I) or that improvement over the error
  // against the original constraint set (criterion IE).
  RelaxationResult greedy(RelaxationLevel level, Criterion criterion,
                          const PriorityWeights& weights = {}) const;

  // Greedy removal up to k = 50. Above that, starts from no constraints and
  // adds, each time, the constraint whose addition leaves the best criterion
  // value against the original query (divided by the kind weight).
  RelaxationResult bidirectional(RelaxationLevel level, Criterion criterion,
                                 const PriorityWeights& weights = {}) const;

  // Global argmax of the score over every proper subset of the constraints.
  // Throws ContractError on a query without constraints and CapacityError
  // above max_constraints.
  RelaxationResult optimal(std::size_t max_constraints = 20) const;

 private:
  SolveOutcome solve_without(const ConstraintSet& removed) const;
  RelaxationResult finish(ConstraintSet removed, SolveOutcome outcome,
                          std::uint64_t calls,
                          std::chrono::steady_clock::time_point start) const;

  PackageQuery q_;
  const ItemTable& table_;
  SolverConfig cfg_;
  SolveOutcome baseline_;
};

RelaxationResult exhaustive_i(const PackageQuery& q, const ItemTable& table,
                              RelaxationLevel level,
                              const SolverConfig& cfg = {});
RelaxationResult exhaustive_ie(const PackageQuery& q, const ItemTable& table,
                               RelaxationLevel level,
                               const SolverConfig& cfg = {});
std::vector<RelaxationResult> random_relax(const PackageQuery& q,
                                           const ItemTable& table,
                                           RelaxationLevel level, int trials,
                                           std::uint64_t seed,
                                           const SolverConfig& cfg = {});
RelaxationResult greedy(const PackageQuery& q, const ItemTable& table,
                        RelaxationLevel level, Criterion criterion,
                        const PriorityWeights& weights = {},
                        const SolverConfig& cfg = {});
RelaxationResult bidirectional_greedy(const PackageQuery& q,
                                      const ItemTable& table,
                                      RelaxationLevel level,
                                      Criterion criterion,
                                      const PriorityWeights& weights = {},
                                      const SolverConfig& cfg = {});
RelaxationResult find_optimal_relaxation(const PackageQuery& q,
                                         const ItemTable& table,
                                         const SolverConfig& cfg = {});

enum class Method {
  kExhaustiveI,
  kExhaustiveIE,
  kGreedyI,
  kGreedyIE,
  kBidirectionalI,
  kBidirectionalIE,
  kRandom,
};

const std::vector<Method>& all_methods();
std::string to_string(Method method);
// "exhaustive-i", "greedy-ie", ...; std::nullopt when unknown.
std::optional<Method> parse_method(const std::string& name);

// Runs one fixed-level method. Random search runs `random_trials` trials
// drawn from `seed`.
std::vector<RelaxationResult> run_method(const Relaxer& relaxer, Method method,
                                         RelaxationLevel level,
                                         const PriorityWeights& weights = {},
                                         int random_trials = 1,
                                         std::uint64_t seed = 0);

}  // namespace pkgrelax
