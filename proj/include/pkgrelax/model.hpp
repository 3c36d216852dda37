#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pkgrelax {

using ItemId = std::uint64_t;

// Absolute tolerance applied to every real comparison against a bound.
inline constexpr double kFeasibilityTolerance = 1e-9;

struct Item {
  ItemId id = 0;
  std::vector<double> values;  // one per schema attribute
};

// Immutable relation of candidate items. Ids must be unique but need not be
// dense or sorted; rows keep their insertion order.
class ItemTable {
 public:
  ItemTable() = default;
  // Throws ValidationError on duplicate ids, arity mismatches, non-finite
  // values or duplicate attribute names.
  ItemTable(std::vector<std::string> schema, std::vector<Item> items);

  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<Item>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  bool has_attribute(const std::string& name) const;
  // Throws SchemaError when the attribute is unknown.
  std::size_t attribute_index(const std::string& name) const;

  std::optional<std::size_t> find_row(ItemId id) const;
  // Throws ValidationError when the id is not in the table.
  std::size_t row_of(ItemId id) const;

  double value(std::size_t row, std::size_t column) const {
    return items_[row].values[column];
  }

  // Table restricted to the given rows, in the given order.
  ItemTable subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> schema_;
  std::vector<Item> items_;
  std::unordered_map<ItemId, std::size_t> row_by_id_;
};

enum class ConstraintKind { kBase, kGlobal, kCardinality };
enum class Aggregate { kNone, kSum, kCount };
enum class Comparison { kLessEqual, kGreaterEqual };

struct Constraint {
  ConstraintKind kind = ConstraintKind::kGlobal;
  std::string attr;  // empty for cardinality constraints
  Aggregate agg = Aggregate::kSum;
  Comparison op = Comparison::kLessEqual;
  double beta = 0.0;

  static Constraint base(std::string attr, Comparison op, double beta);
  static Constraint global_sum(std::string attr, Comparison op, double beta);
  static Constraint cardinality(Comparison op, double beta);

  // e.g. "each cholesterol <= 60", "sum(calories) >= 1500", "count(*) <= 4".
  std::string describe() const;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

enum class Direction { kMinimize, kMaximize };

struct Objective {
  Direction direction = Direction::kMinimize;
  Aggregate agg = Aggregate::kSum;
  std::string attr;

  std::string describe() const;

  friend bool operator==(const Objective&, const Objective&) = default;
};

// Sorted, duplicate-free list of constraint indices.
using ConstraintSet = std::vector<std::size_t>;

// Indices in [0, n) that are not in `set`.
ConstraintSet complement(std::size_t n, const ConstraintSet& set);

// A conjunctive package query: the constraint list plus the objective. The
// objective is not a constraint and is never relaxed.
class PackageQuery {
 public:
  PackageQuery() = default;
  // Throws ContractError on structurally invalid constraints (a cardinality
  // constraint with an attribute, a non-finite bound, ...).
  PackageQuery(std::vector<Constraint> constraints, Objective objective);

  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Objective& objective() const { return objective_; }
  std::size_t size() const { return constraints_.size(); }

  // The query keeping only `kept` (sorted indices into this query).
  PackageQuery retaining(const ConstraintSet& kept) const;
  // The query with `removed` dropped.
  PackageQuery without(const ConstraintSet& removed) const;

  // Throws SchemaError if any referenced attribute is missing from the table.
  void validate_against(const ItemTable& table) const;

  friend bool operator==(const PackageQuery&, const PackageQuery&) = default;

 private:
  std::vector<Constraint> constraints_;
  Objective objective_;
};

// A set of items. Ids are kept sorted ascending; duplicates are rejected.
class Package {
 public:
  Package() = default;
  // Throws ValidationError on a repeated id.
  explicit Package(std::vector<ItemId> ids);

  const std::vector<ItemId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  friend bool operator==(const Package&, const Package&) = default;

 private:
  std::vector<ItemId> ids_;
};

enum class SolveStatus { kFeasible, kInfeasible };

struct SolveOutcome {
  SolveStatus status = SolveStatus::kInfeasible;
  Package package;
  double objective_value = 0.0;  // meaningful only when feasible

  bool feasible() const { return status == SolveStatus::kFeasible; }

  static SolveOutcome infeasible() { return {}; }
  static SolveOutcome found(Package package, double objective_value) {
    return {SolveStatus::kFeasible, std::move(package), objective_value};
  }

  friend bool operator==(const SolveOutcome&, const SolveOutcome&) = default;
};

// f_c(pkg). Sum over the package for global constraints, |pkg| for
// cardinality, and the worst item for base constraints (max for <=, min for
// >=; beta itself on the empty package).
double evaluate_constraint_function(const Constraint& c, const Package& pkg,
                                    const ItemTable& table);

bool satisfies(const Constraint& c, const Package& pkg, const ItemTable& table);
bool satisfies_all(const PackageQuery& q, const Package& pkg,
                   const ItemTable& table);

// Sum of the objective attribute over the package, in ascending id order.
double objective_value(const Objective& objective, const Package& pkg,
                       const ItemTable& table);

// True iff `value op beta` holds within kFeasibilityTolerance.
bool compare_within_tolerance(double value, Comparison op, double beta);

// Row-level forms of the above. `rows` must list table rows in ascending item
// id order; the solver calls these so that every route sums in one order.
double evaluate_constraint_rows(const Constraint& c, std::size_t column,
                                std::span<const std::size_t> rows,
                                const ItemTable& table);
double sum_rows(std::size_t column, std::span<const std::size_t> rows,
                const ItemTable& table);

// Shortest decimal text that reads back to exactly `v`.
std::string format_real(double v);

const char* to_string(Comparison op);
const char* to_string(Direction direction);
const char* to_string(ConstraintKind kind);

}  // namespace pkgrelax
