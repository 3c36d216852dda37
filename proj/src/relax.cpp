#include "pkgrelax/relax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pkgrelax/error.hpp"

namespace pkgrelax {

RelaxationLevel::RelaxationLevel(int k) : k_(k) {
  if (k < 0 || k > 100) {
    throw ContractError("relaxation level must be in [0, 100], got " +
                        std::to_string(k));
  }
}

std::size_t RelaxationLevel::retained(std::size_t n) const {
  // floor(n * (100 - k) / 100 + 1/2) in integers.
  std::size_t r = (2 * n * static_cast<std::size_t>(100 - k_) + 100) / 200;
  if (k_ > 0 && r == n && n > 0) r = n - 1;
  return r;
}

double PriorityWeights::of(ConstraintKind kind) const {
  switch (kind) {
    case ConstraintKind::kBase:
      return base;
    case ConstraintKind::kGlobal:
      return global;
    case ConstraintKind::kCardinality:
      return cardinality;
  }
  return 1.0;
}

void PriorityWeights::validate() const {
  for (double w : {base, global, cardinality}) {
    if (!std::isfinite(w) || w <= 0) {
      throw ContractError("priority weights must be finite and positive");
    }
  }
}

namespace {

// Exhaustive-I order: improvement, then lower error.
bool better_by_improvement(const RelaxationScore& a, const RelaxationScore& b) {
  if (a.improvement != b.improvement) return a.improvement > b.improvement;
  return a.error < b.error;
}

// Exhaustive-IE order: score, then higher improvement.
bool better_by_score(const RelaxationScore& a, const RelaxationScore& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.improvement > b.improvement;
}

bool strictly_better(Criterion criterion, const RelaxationScore& a,
                     const RelaxationScore& b) {
  return criterion == Criterion::kImprovement ? better_by_improvement(a, b)
                                              : better_by_score(a, b);
}

// Advances `combo` (sorted, values < n) to the next combination in
// lexicographic order; false after the last one.
bool next_combination(std::vector<std::size_t>& combo, std::size_t n) {
  const std::size_t m = combo.size();
  for (std::size_t i = m; i-- > 0;) {
    if (combo[i] < n - m + i) {
      ++combo[i];
      for (std::size_t j = i + 1; j < m; ++j) combo[j] = combo[j - 1] + 1;
      return true;
    }
  }
  return false;
}

ConstraintSet with(ConstraintSet set, std::size_t index) {
  set.insert(std::upper_bound(set.begin(), set.end(), index), index);
  return set;
}

}  // namespace

Relaxer::Relaxer(PackageQuery q, const ItemTable& table, SolverConfig cfg)
    : q_(std::move(q)), table_(table), cfg_(cfg) {
  baseline_ = solve(q_, table_, cfg_).outcome;
}

SolveOutcome Relaxer::solve_without(const ConstraintSet& removed) const {
  return solve(q_.without(removed), table_, cfg_).outcome;
}

RelaxationResult Relaxer::finish(
    ConstraintSet removed, SolveOutcome outcome, std::uint64_t calls,
    std::chrono::steady_clock::time_point start) const {
  RelaxationResult result;
  result.metrics = score_relaxation(q_, baseline_, removed, outcome, table_);
  result.removed = std::move(removed);
  result.outcome = std::move(outcome);
  result.solver_calls = calls;
  result.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

RelaxationResult Relaxer::exhaustive(RelaxationLevel level,
                                     Criterion criterion) const {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = q_.size();
  const std::size_t m = level.removals(n);

  std::vector<std::size_t> combo(m);
  std::iota(combo.begin(), combo.end(), 0);
  std::optional<RelaxationResult> best;
  std::uint64_t calls = 0;
  do {
    SolveOutcome outcome = solve_without(combo);
    ++calls;
    RelaxationScore s = score_relaxation(q_, baseline_, combo, outcome, table_);
    // Enumeration is lexicographic, so keeping the first of equals applies
    // the removed-set tie rule.
    if (!best || strictly_better(criterion, s, best->metrics)) {
      best.emplace();
      best->removed = combo;
      best->outcome = std::move(outcome);
      best->metrics = std::move(s);
    }
  } while (next_combination(combo, n));

  best->solver_calls = calls;
  best->wall_time = std::chrono::steady_clock::now() - start;
  return std::move(*best);
}

std::vector<RelaxationResult> Relaxer::random(RelaxationLevel level,
                                              int trials,
                                              std::uint64_t seed) const {
  if (trials < 1) throw ContractError("random search needs trials >= 1");
  const std::size_t n = q_.size();
  const std::size_t m = level.removals(n);
  std::mt19937_64 rng(seed);
  std::vector<RelaxationResult> results;
  results.reserve(static_cast<std::size_t>(trials));
  std::vector<std::size_t> pool(n);
  for (int t = 0; t < trials; ++t) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    ConstraintSet removed(pool.begin(), pool.begin() + static_cast<long>(m));
    std::sort(removed.begin(), removed.end());
    SolveOutcome outcome = solve_without(removed);
    results.push_back(finish(std::move(removed), std::move(outcome), 1, start));
  }
  return results;
}

RelaxationResult Relaxer::greedy(RelaxationLevel level, Criterion criterion,
                                 const PriorityWeights& weights) const {
  weights.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = q_.size();
  const std::size_t m = level.removals(n);

  ConstraintSet removed;
  std::vector<std::size_t> sequence;
  SolveOutcome current = baseline_;
  std::uint64_t calls = 0;
  for (std::size_t step = 0; step < m; ++step) {
    std::optional<std::size_t> pick;
    double pick_value = 0.0;
    SolveOutcome pick_outcome;
    for (std::size_t j : complement(n, removed)) {
      ConstraintSet candidate = with(removed, j);
      SolveOutcome outcome = solve_without(candidate);
      ++calls;
      const double gain = improvement(current, outcome).value;
      double value = gain;
      if (criterion == Criterion::kImprovementError) {
        const double error =
            outcome.feasible()
                ? mape_error(q_, candidate, outcome.package, table_).value
                : 0.0;
        value = relaxation_score(gain, error);
      }
      value *= weights.of(q_.constraints()[j].kind);
      if (!pick || value > pick_value) {
        pick = j;
        pick_value = value;
        pick_outcome = std::move(outcome);
      }
    }
    removed = with(removed, *pick);
    sequence.push_back(*pick);
    current = std::move(pick_outcome);
  }

  RelaxationResult result = finish(std::move(removed), std::move(current),
                                   calls, start);
  result.sequence = std::move(sequence);
  return result;
}

RelaxationResult Relaxer::bidirectional(RelaxationLevel level,
                                        Criterion criterion,
                                        const PriorityWeights& weights) const {
  if (level.k() <= 50) return greedy(level, criterion, weights);
  weights.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = q_.size();
  const std::size_t r = level.retained(n);

  ConstraintSet kept;
  std::vector<std::size_t> sequence;
  std::uint64_t calls = 0;
  if (r == 0) {
    SolveOutcome outcome = solve_without(complement(n, kept));
    return finish(complement(n, kept), std::move(outcome), 1, start);
  }

  SolveOutcome current;
  for (std::size_t step = 0; step < r; ++step) {
    std::optional<std::size_t> pick;
    double pick_value = 0.0;
    SolveOutcome pick_outcome;
    for (std::size_t j : complement(n, kept)) {
      const ConstraintSet candidate_kept = with(kept, j);
      const ConstraintSet candidate_removed = complement(n, candidate_kept);
      SolveOutcome outcome = solve_without(candidate_removed);
      ++calls;
      const RelaxationScore s =
          score_relaxation(q_, baseline_, candidate_removed, outcome, table_);
      double value =
          criterion == Criterion::kImprovement ? s.improvement : s.score;
      value /= weights.of(q_.constraints()[j].kind);
      if (!pick || value > pick_value) {
        pick = j;
        pick_value = value;
        pick_outcome = std::move(outcome);
      }
    }
    kept = with(kept, *pick);
    sequence.push_back(*pick);
    current = std::move(pick_outcome);
  }

  RelaxationResult result =
      finish(complement(n, kept), std::move(current), calls, start);
  result.sequence = std::move(sequence);
  return result;
}

RelaxationResult Relaxer::optimal(std::size_t max_constraints) const {
  const std::size_t n = q_.size();
  if (n == 0) {
    throw ContractError("a query without constraints has no relaxation");
  }
  if (n > max_constraints || n >= 63) {
    throw CapacityError("optimal relaxation enumerates at most " +
                        std::to_string(max_constraints) +
                        " constraints, query has " + std::to_string(n));
  }
  const auto start = std::chrono::steady_clock::now();
  std::optional<RelaxationResult> best;
  std::uint64_t calls = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    ConstraintSet removed;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) removed.push_back(i);
    }
    SolveOutcome outcome = solve_without(removed);
    ++calls;
    RelaxationScore s =
        score_relaxation(q_, baseline_, removed, outcome, table_);
    const bool take =
        !best || better_by_score(s, best->metrics) ||
        (!better_by_score(best->metrics, s) && removed < best->removed);
    if (take) {
      best.emplace();
      best->removed = std::move(removed);
      best->outcome = std::move(outcome);
      best->metrics = std::move(s);
    }
  }
  best->solver_calls = calls;
  best->wall_time = std::chrono::steady_clock::now() - start;
  return std::move(*best);
}

RelaxationResult exhaustive_i(const PackageQuery& q, const ItemTable& table,
                              RelaxationLevel level, const SolverConfig& cfg) {
  return Relaxer(q, table, cfg).exhaustive_i(level);
}

RelaxationResult exhaustive_ie(const PackageQuery& q, const ItemTable& table,
                               RelaxationLevel level, const SolverConfig& cfg) {
  return Relaxer(q, table, cfg).exhaustive_ie(level);
}

std::vector<RelaxationResult> random_relax(const PackageQuery& q,
                                           const ItemTable& table,
                                           RelaxationLevel level, int trials,
                                           std::uint64_t seed,
                                           const SolverConfig& cfg) {
  return Relaxer(q, table, cfg).random(level, trials, seed);
}

RelaxationResult greedy(const PackageQuery& q, const ItemTable& table,
                        RelaxationLevel level, Criterion criterion,
                        const PriorityWeights& weights,
                        const SolverConfig& cfg) {
  return Relaxer(q, table, cfg).greedy(level, criterion, weights);
}

RelaxationResult bidirectional_greedy(const PackageQuery& q,
                                      const ItemTable& table,
                                      RelaxationLevel level,
                                      Criterion criterion,
                                      const PriorityWeights& weights,
                                      const SolverConfig& cfg) {
  return Relaxer(q, table, cfg).bidirectional(level, criterion, weights);
}

RelaxationResult find_optimal_relaxation(const PackageQuery& q,
                                         const ItemTable& table,
                                         const SolverConfig& cfg) {
  return Relaxer(q, table, cfg).optimal();
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {
      Method::kExhaustiveI,    Method::kExhaustiveIE,    Method::kGreedyI,
      Method::kGreedyIE,       Method::kBidirectionalI, Method::kBidirectionalIE,
      Method::kRandom};
  return methods;
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kExhaustiveI:
      return "exhaustive-i";
    case Method::kExhaustiveIE:
      return "exhaustive-ie";
    case Method::kGreedyI:
      return "greedy-i";
    case Method::kGreedyIE:
      return "greedy-ie";
    case Method::kBidirectionalI:
      return "bidirectional-i";
    case Method::kBidirectionalIE:
      return "bidirectional-ie";
    case Method::kRandom:
      return "random";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::vector<RelaxationResult> run_method(const Relaxer& relaxer, Method method,
                                         RelaxationLevel level,
                                         const PriorityWeights& weights,
                                         int random_trials,
                                         std::uint64_t seed) {
  switch (method) {
    case Method::kExhaustiveI:
      return {relaxer.exhaustive_i(level)};
    case Method::kExhaustiveIE:
      return {relaxer.exhaustive_ie(level)};
    case Method::kGreedyI:
      return {relaxer.greedy(level, Criterion::kImprovement, weights)};
    case Method::kGreedyIE:
      return {relaxer.greedy(level, Criterion::kImprovementError, weights)};
    case Method::kBidirectionalI:
      return {relaxer.bidirectional(level, Criterion::kImprovement, weights)};
    case Method::kBidirectionalIE:
      return {
          relaxer.bidirectional(level, Criterion::kImprovementError, weights)};
    case Method::kRandom:
      return relaxer.random(level, random_trials, seed);
  }
  return {};
}

}  // namespace pkgrelax
