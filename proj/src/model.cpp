#include "pkgrelax/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "pkgrelax/error.hpp"

namespace pkgrelax {

ItemTable::ItemTable(std::vector<std::string> schema, std::vector<Item> items)
    : schema_(std::move(schema)), items_(std::move(items)) {
  std::unordered_set<std::string> names;
  for (const auto& name : schema_) {
    if (!names.insert(name).second) {
      throw ValidationError("duplicate attribute name '" + name + "'");
    }
  }
  row_by_id_.reserve(items_.size());
  for (std::size_t row = 0; row < items_.size(); ++row) {
    const Item& item = items_[row];
    if (item.values.size() != schema_.size()) {
      throw ValidationError("item " + std::to_string(item.id) + " has " +
                            std::to_string(item.values.size()) +
                            " values, schema has " +
                            std::to_string(schema_.size()));
    }
    for (double v : item.values) {
      if (!std::isfinite(v)) {
        throw ValidationError("item " + std::to_string(item.id) +
                              " has a non-finite value");
      }
    }
    if (!row_by_id_.emplace(item.id, row).second) {
      throw ValidationError("duplicate item id " + std::to_string(item.id));
    }
  }
}

bool ItemTable::has_attribute(const std::string& name) const {
  return std::find(schema_.begin(), schema_.end(), name) != schema_.end();
}

std::size_t ItemTable::attribute_index(const std::string& name) const {
  auto it = std::find(schema_.begin(), schema_.end(), name);
  if (it == schema_.end()) {
    throw SchemaError("unknown attribute '" + name + "'");
  }
  return static_cast<std::size_t>(it - schema_.begin());
}

std::optional<std::size_t> ItemTable::find_row(ItemId id) const {
  auto it = row_by_id_.find(id);
  if (it == row_by_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t ItemTable::row_of(ItemId id) const {
  auto row = find_row(id);
  if (!row) {
    throw ValidationError("item id " + std::to_string(id) +
                          " is not in the table");
  }
  return *row;
}

ItemTable ItemTable::subset(std::span<const std::size_t> rows) const {
  std::vector<Item> kept;
  kept.reserve(rows.size());
  for (std::size_t row : rows) kept.push_back(items_.at(row));
  return ItemTable(schema_, std::move(kept));
}

Constraint Constraint::base(std::string attr, Comparison op, double beta) {
  return {ConstraintKind::kBase, std::move(attr), Aggregate::kNone, op, beta};
}

Constraint Constraint::global_sum(std::string attr, Comparison op,
                                  double beta) {
  return {ConstraintKind::kGlobal, std::move(attr), Aggregate::kSum, op, beta};
}

Constraint Constraint::cardinality(Comparison op, double beta) {
  return {ConstraintKind::kCardinality, "", Aggregate::kCount, op, beta};
}

std::string Constraint::describe() const {
  std::string lhs;
  switch (kind) {
    case ConstraintKind::kBase:
      lhs = "each " + attr;
      break;
    case ConstraintKind::kGlobal:
      lhs = "sum(" + attr + ")";
      break;
    case ConstraintKind::kCardinality:
      lhs = "count(*)";
      break;
  }
  return lhs + " " + to_string(op) + " " + format_real(beta);
}

std::string Objective::describe() const {
  return std::string(to_string(direction)) + " sum(" + attr + ")";
}

ConstraintSet complement(std::size_t n, const ConstraintSet& set) {
  ConstraintSet out;
  out.reserve(n - std::min(n, set.size()));
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < set.size() && set[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

PackageQuery::PackageQuery(std::vector<Constraint> constraints,
                           Objective objective)
    : constraints_(std::move(constraints)), objective_(std::move(objective)) {
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const Constraint& c = constraints_[i];
    const std::string where = "constraint " + std::to_string(i) + ": ";
    if (!std::isfinite(c.beta)) {
      throw ContractError(where + "bound must be finite");
    }
    switch (c.kind) {
      case ConstraintKind::kBase:
        if (c.attr.empty() || c.agg != Aggregate::kNone) {
          throw ContractError(where + "base constraint needs an attribute "
                                      "and no aggregate");
        }
        break;
      case ConstraintKind::kGlobal:
        if (c.attr.empty() || c.agg != Aggregate::kSum) {
          throw ContractError(where + "global constraint needs sum(attr)");
        }
        break;
      case ConstraintKind::kCardinality:
        if (!c.attr.empty() || c.agg != Aggregate::kCount) {
          throw ContractError(where + "cardinality constraint is count(*)");
        }
        break;
    }
  }
  if (objective_.attr.empty() || objective_.agg != Aggregate::kSum) {
    throw ContractError("objective must be sum(attr)");
  }
}

PackageQuery PackageQuery::retaining(const ConstraintSet& kept) const {
  std::vector<Constraint> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(constraints_.at(i));
  return PackageQuery(std::move(out), objective_);
}

PackageQuery PackageQuery::without(const ConstraintSet& removed) const {
  return retaining(complement(constraints_.size(), removed));
}

void PackageQuery::validate_against(const ItemTable& table) const {
  for (const auto& c : constraints_) {
    if (c.kind != ConstraintKind::kCardinality) table.attribute_index(c.attr);
  }
  table.attribute_index(objective_.attr);
}

Package::Package(std::vector<ItemId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  auto dup = std::adjacent_find(ids_.begin(), ids_.end());
  if (dup != ids_.end()) {
    throw ValidationError("item id " + std::to_string(*dup) +
                          " appears twice in a package");
  }
}

namespace {

std::vector<std::size_t> rows_of(const Package& pkg, const ItemTable& table) {
  std::vector<std::size_t> rows;
  rows.reserve(pkg.size());
  for (ItemId id : pkg.ids()) rows.push_back(table.row_of(id));
  return rows;
}

}  // namespace

double sum_rows(std::size_t column, std::span<const std::size_t> rows,
                const ItemTable& table) {
  double total = 0.0;
  for (std::size_t row : rows) total += table.value(row, column);
  return total;
}

double evaluate_constraint_rows(const Constraint& c, std::size_t column,
                                std::span<const std::size_t> rows,
                                const ItemTable& table) {
  switch (c.kind) {
    case ConstraintKind::kCardinality:
      return static_cast<double>(rows.size());
    case ConstraintKind::kGlobal:
      return sum_rows(column, rows, table);
    case ConstraintKind::kBase: {
      if (rows.empty()) return c.beta;
      double worst = table.value(rows.front(), column);
      for (std::size_t row : rows.subspan(1)) {
        const double v = table.value(row, column);
        worst = c.op == Comparison::kLessEqual ? std::max(worst, v)
                                               : std::min(worst, v);
      }
      return worst;
    }
  }
  return 0.0;
}

double evaluate_constraint_function(const Constraint& c, const Package& pkg,
                                    const ItemTable& table) {
  const std::size_t column = c.kind == ConstraintKind::kCardinality
                                 ? 0
                                 : table.attribute_index(c.attr);
  const auto rows = rows_of(pkg, table);
  return evaluate_constraint_rows(c, column, rows, table);
}

bool compare_within_tolerance(double value, Comparison op, double beta) {
  return op == Comparison::kLessEqual ? value <= beta + kFeasibilityTolerance
                                      : value >= beta - kFeasibilityTolerance;
}

bool satisfies(const Constraint& c, const Package& pkg,
               const ItemTable& table) {
  return compare_within_tolerance(evaluate_constraint_function(c, pkg, table),
                                  c.op, c.beta);
}

bool satisfies_all(const PackageQuery& q, const Package& pkg,
                   const ItemTable& table) {
  return std::all_of(
      q.constraints().begin(), q.constraints().end(),
      [&](const Constraint& c) { return satisfies(c, pkg, table); });
}

double objective_value(const Objective& objective, const Package& pkg,
                       const ItemTable& table) {
  const std::size_t column = table.attribute_index(objective.attr);
  const auto rows = rows_of(pkg, table);
  return sum_rows(column, rows, table);
}

std::string format_real(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

const char* to_string(Comparison op) {
  return op == Comparison::kLessEqual ? "<=" : ">=";
}

const char* to_string(Direction direction) {
  return direction == Direction::kMinimize ? "minimize" : "maximize";
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kBase:
      return "base";
    case ConstraintKind::kGlobal:
      return "global";
    case ConstraintKind::kCardinality:
      return "cardinality";
  }
  return "?";
}

}  // namespace pkgrelax
