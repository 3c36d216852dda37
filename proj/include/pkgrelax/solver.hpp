#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "pkgrelax/model.hpp"

namespace pkgrelax {

struct SolverConfig {
  std::size_t max_items_bruteforce = 15;
  std::uint64_t node_limit = 100'000'000;
  // Package size cap used when the query has no cardinality upper bound.
  // 0 means "number of items".
  std::size_t max_package_size_unbounded = 0;
};

struct SolveStats {
  std::uint64_t nodes_explored = 0;
  std::chrono::nanoseconds wall_time{0};
};

struct SolveResult {
  SolveOutcome outcome;
  SolveStats stats;
};

// Strict preference between two feasible packages: better objective, then
// fewer items, then the lexicographically smaller ascending id list.
bool package_preferred(Direction direction, double value_a, const Package& a,
                       double value_b, const Package& b);

// Items that individually satisfy every base constraint, in table order.
// Throws ContractError if a non-base constraint is passed.
ItemTable prefilter_items(const std::vector<Constraint>& base_constraints,
                          const ItemTable& table);

// Reference oracle: enumerates all 2^n subsets. Throws CapacityError when the
// table has more than cfg.max_items_bruteforce items.
SolveOutcome solve_bruteforce(const PackageQuery& q, const ItemTable& table,
                              const SolverConfig& cfg = {});

// Exact top-1 package by depth-first branch-and-bound. Returns the same
// outcome as solve_bruteforce wherever both run. Throws ResourceError when
// cfg.node_limit is exceeded and SchemaError on unknown attributes.
SolveResult solve(const PackageQuery& q, const ItemTable& table,
                  const SolverConfig& cfg = {});

}  // namespace pkgrelax
