#include "pkgrelax/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "pkgrelax/error.hpp"

namespace pkgrelax {

bool package_preferred(Direction direction, double value_a, const Package& a,
                       double value_b, const Package& b) {
  if (value_a != value_b) {
    return direction == Direction::kMaximize ? value_a > value_b
                                             : value_a < value_b;
  }
  if (a.size() != b.size()) return a.size() < b.size();
  return a.ids() < b.ids();
}

ItemTable prefilter_items(const std::vector<Constraint>& base_constraints,
                          const ItemTable& table) {
  std::vector<std::size_t> columns;
  for (const auto& c : base_constraints) {
    if (c.kind != ConstraintKind::kBase) {
      throw ContractError("prefilter_items accepts base constraints only, got " +
                          c.describe());
    }
    columns.push_back(table.attribute_index(c.attr));
  }
  std::vector<std::size_t> kept;
  for (std::size_t row = 0; row < table.size(); ++row) {
    bool ok = true;
    for (std::size_t i = 0; i < base_constraints.size() && ok; ++i) {
      const auto& c = base_constraints[i];
      ok = compare_within_tolerance(table.value(row, columns[i]), c.op, c.beta);
    }
    if (ok) kept.push_back(row);
  }
  return table.subset(kept);
}

namespace {

bool has_cardinality_upper_bound(const PackageQuery& q) {
  return std::any_of(q.constraints().begin(), q.constraints().end(),
                     [](const Constraint& c) {
                       return c.kind == ConstraintKind::kCardinality &&
                              c.op == Comparison::kLessEqual;
                     });
}

// Size cap that applies to packages of `q` over a table of `n_items` rows.
std::size_t implicit_size_cap(const PackageQuery& q, std::size_t n_items,
                              const SolverConfig& cfg) {
  if (has_cardinality_upper_bound(q) || cfg.max_package_size_unbounded == 0) {
    return n_items;
  }
  return std::min(n_items, cfg.max_package_size_unbounded);
}

std::vector<std::size_t> constraint_columns(const PackageQuery& q,
                                            const ItemTable& table) {
  std::vector<std::size_t> columns;
  for (const auto& c : q.constraints()) {
    columns.push_back(c.kind == ConstraintKind::kCardinality
                          ? 0
                          : table.attribute_index(c.attr));
  }
  return columns;
}

// Incumbent tracking shared by both solvers; `rows` must be in ascending id
// order.
class Incumbent {
 public:
  explicit Incumbent(Direction direction) : direction_(direction) {}

  bool offer(double value, std::span<const std::size_t> rows,
             const ItemTable& table) {
    std::vector<ItemId> ids;
    ids.reserve(rows.size());
    for (std::size_t row : rows) ids.push_back(table.items()[row].id);
    Package candidate(std::move(ids));
    if (best_ && !package_preferred(direction_, value, candidate,
                                    best_->objective_value, best_->package)) {
      return false;
    }
    best_ = SolveOutcome::found(std::move(candidate), value);
    return true;
  }

  bool has_value() const { return best_.has_value(); }
  double value() const { return best_->objective_value; }

  SolveOutcome release() {
    return best_ ? std::move(*best_) : SolveOutcome::infeasible();
  }

 private:
  Direction direction_;
  std::optional<SolveOutcome> best_;
};

bool rows_feasible(const PackageQuery& q, std::span<const std::size_t> columns,
                   std::span<const std::size_t> rows, const ItemTable& table,
                   bool skip_base) {
  const auto& cs = q.constraints();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (skip_base && cs[i].kind == ConstraintKind::kBase) continue;
    const double f = evaluate_constraint_rows(cs[i], columns[i], rows, table);
    if (!compare_within_tolerance(f, cs[i].op, cs[i].beta)) return false;
  }
  return true;
}

void sort_rows_by_id(std::vector<std::size_t>& rows, const ItemTable& table) {
  std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    return table.items()[a].id < table.items()[b].id;
  });
}

// Tables above this size skip the per-depth sorted-suffix tables.
constexpr std::size_t kMaxIntervalItems = 2048;

// One global or cardinality constraint in `sum(coef) <= rhs` form over the
// candidate order. For every depth d it can bound how many of the remaining
// candidates [d, n) a feasible completion may add.
struct LinearRow {
  std::vector<double> coef;
  double rhs = 0.0;
  double margin = 0.0;
  bool uniform = false;
  double uniform_coef = 0.0;
  bool has_tables = false;
  // cum[offset[d] + t]: sum of the t smallest coefficients among [d, n).
  std::vector<double> cum;
  std::vector<std::size_t> offset;
  // Number of negative coefficients among [d, n).
  std::vector<std::size_t> negatives;
  // Sum of negative coefficients among [d, n).
  std::vector<double> negative_sum;

  void build() {
    const std::size_t n = coef.size();
    double abs_total = 0.0;
    for (double a : coef) abs_total += std::abs(a);
    margin = kFeasibilityTolerance + 1e-9 * (1.0 + std::abs(rhs) + abs_total);

    uniform = std::adjacent_find(coef.begin(), coef.end(),
                                 std::not_equal_to<>()) == coef.end();
    uniform_coef = n > 0 ? coef.front() : 0.0;

    negatives.assign(n + 1, 0);
    negative_sum.assign(n + 1, 0.0);
    for (std::size_t d = n; d-- > 0;) {
      negatives[d] = negatives[d + 1] + (coef[d] < 0 ? 1 : 0);
      negative_sum[d] = negative_sum[d + 1] + std::min(coef[d], 0.0);
    }
    if (uniform || n > kMaxIntervalItems) return;

    has_tables = true;
    offset.assign(n + 1, 0);
    std::size_t total = 0;
    for (std::size_t d = 0; d <= n; ++d) {
      offset[d] = total;
      total += n - d + 1;
    }
    cum.assign(total, 0.0);
    std::vector<double> sorted;
    sorted.reserve(n);
    for (std::size_t d = n + 1; d-- > 0;) {
      if (d < n) {
        sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), coef[d]),
                      coef[d]);
      }
      double running = 0.0;
      cum[offset[d]] = 0.0;
      for (std::size_t t = 0; t < sorted.size(); ++t) {
        running += sorted[t];
        cum[offset[d] + t + 1] = running;
      }
    }
  }

  double smallest_sum(std::size_t d, std::size_t t) const {
    return uniform ? static_cast<double>(t) * uniform_coef : cum[offset[d] + t];
  }

  // Narrows [lo, hi] to the addition counts compatible with this row given
  // the current partial sum. Returns false when no count is.
  bool narrow(std::size_t d, double current, std::size_t& lo,
              std::size_t& hi) const {
    const std::size_t remaining = coef.size() - d;
    const double slack = rhs - current + margin;
    if (!uniform && !has_tables) {
      return negative_sum[d] <= slack;
    }
    // smallest_sum(d, .) is convex in t with its minimum at `pivot`.
    const std::size_t pivot =
        uniform ? (uniform_coef < 0 ? remaining : 0) : negatives[d];
    if (smallest_sum(d, pivot) > slack) return false;

    std::size_t a = 0, b = pivot;  // first t in [0, pivot] within slack
    while (a < b) {
      const std::size_t mid = a + (b - a) / 2;
      if (smallest_sum(d, mid) <= slack) {
        b = mid;
      } else {
        a = mid + 1;
      }
    }
    const std::size_t first = a;
    a = pivot;  // last t in [pivot, remaining] within slack
    b = remaining;
    while (a < b) {
      const std::size_t mid = a + (b - a + 1) / 2;
      if (smallest_sum(d, mid) <= slack) {
        a = mid;
      } else {
        b = mid - 1;
      }
    }
    lo = std::max(lo, first);
    hi = std::min(hi, a);
    return lo <= hi;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const PackageQuery& q, const ItemTable& table,
                 const SolverConfig& cfg)
      : q_(q),
        table_(table),
        cfg_(cfg),
        columns_(constraint_columns(q, table)),
        objective_column_(table.attribute_index(q.objective().attr)),
        incumbent_(q.objective().direction) {
    const double sign =
        q.objective().direction == Direction::kMaximize ? 1.0 : -1.0;

    for (std::size_t row = 0; row < table.size(); ++row) {
      bool ok = true;
      for (std::size_t i = 0; i < q.size() && ok; ++i) {
        const auto& c = q.constraints()[i];
        if (c.kind != ConstraintKind::kBase) continue;
        ok = compare_within_tolerance(table.value(row, columns_[i]), c.op,
                                      c.beta);
      }
      if (ok) candidates_.push_back(row);
    }
    std::vector<double> gain_by_row(table.size(), 0.0);
    for (std::size_t row : candidates_) {
      gain_by_row[row] = sign * table.value(row, objective_column_);
    }
    std::sort(candidates_.begin(), candidates_.end(),
              [&](std::size_t a, std::size_t b) {
                if (gain_by_row[a] != gain_by_row[b]) {
                  return gain_by_row[a] > gain_by_row[b];
                }
                return table.items()[a].id < table.items()[b].id;
              });

    const std::size_t n = candidates_.size();
    gain_.reserve(n);
    gain_prefix_.assign(n + 1, 0.0);
    double abs_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      gain_.push_back(gain_by_row[candidates_[i]]);
      gain_prefix_[i + 1] = gain_prefix_[i] + gain_[i];
      abs_total += std::abs(gain_[i]);
      if (gain_[i] > 0) positive_end_ = i + 1;
    }
    objective_margin_ = 1e-9 * (1.0 + abs_total);

    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto& c = q.constraints()[i];
      if (c.kind == ConstraintKind::kBase) continue;
      const double s = c.op == Comparison::kLessEqual ? 1.0 : -1.0;
      LinearRow row;
      row.rhs = s * c.beta;
      row.coef.reserve(n);
      for (std::size_t r : candidates_) {
        const double a = c.kind == ConstraintKind::kCardinality
                             ? 1.0
                             : table.value(r, columns_[i]);
        row.coef.push_back(s * a);
      }
      rows_.push_back(std::move(row));
    }
    const std::size_t cap = implicit_size_cap(q, table.size(), cfg);
    if (cap < n) {
      LinearRow row;
      row.rhs = static_cast<double>(cap);
      row.coef.assign(n, 1.0);
      rows_.push_back(std::move(row));
    }
    for (auto& row : rows_) row.build();
    partial_.assign(rows_.size(), 0.0);
  }

  SolveResult run() {
    const auto start = std::chrono::steady_clock::now();
    search(0, true);
    SolveResult result;
    result.outcome = incumbent_.release();
    result.stats.nodes_explored = nodes_;
    result.stats.wall_time = std::chrono::steady_clock::now() - start;
    return result;
  }

 private:
  void search(std::size_t depth, bool just_included) {
    if (++nodes_ > cfg_.node_limit) {
      throw ResourceError("branch-and-bound node limit of " +
                          std::to_string(cfg_.node_limit) + " exceeded");
    }
    const std::size_t n = candidates_.size();
    std::size_t lo = 0;
    std::size_t hi = n - depth;
    for (std::size_t j = 0; j < rows_.size(); ++j) {
      if (!rows_[j].narrow(depth, partial_[j], lo, hi)) return;
    }
    if (incumbent_.has_value()) {
      const std::size_t positive =
          positive_end_ > depth ? positive_end_ - depth : 0;
      const std::size_t take = std::clamp(positive, lo, hi);
      const double bound =
          gain_sum_ + (gain_prefix_[depth + take] - gain_prefix_[depth]);
      const double incumbent_gain =
          q_.objective().direction == Direction::kMaximize
              ? incumbent_.value()
              : -incumbent_.value();
      if (bound < incumbent_gain - objective_margin_) return;
    }
    if (just_included && lo == 0) evaluate();
    if (depth == n) return;

    if (hi >= 1) {
      chosen_.push_back(candidates_[depth]);
      gain_sum_ += gain_[depth];
      for (std::size_t j = 0; j < rows_.size(); ++j) {
        partial_[j] += rows_[j].coef[depth];
      }
      search(depth + 1, true);
      for (std::size_t j = 0; j < rows_.size(); ++j) {
        partial_[j] -= rows_[j].coef[depth];
      }
      gain_sum_ -= gain_[depth];
      chosen_.pop_back();
    }
    search(depth + 1, false);
  }

  void evaluate() {
    scratch_.assign(chosen_.begin(), chosen_.end());
    sort_rows_by_id(scratch_, table_);
    if (!rows_feasible(q_, columns_, scratch_, table_, /*skip_base=*/true)) {
      return;
    }
    if (scratch_.size() > implicit_size_cap(q_, table_.size(), cfg_)) return;
    incumbent_.offer(sum_rows(objective_column_, scratch_, table_), scratch_,
                     table_);
  }

  const PackageQuery& q_;
  const ItemTable& table_;
  const SolverConfig& cfg_;
  std::vector<std::size_t> columns_;
  std::size_t objective_column_;
  Incumbent incumbent_;

  std::vector<std::size_t> candidates_;  // table rows, best gain first
  std::vector<double> gain_;
  std::vector<double> gain_prefix_;
  std::size_t positive_end_ = 0;
  double objective_margin_ = 0.0;
  std::vector<LinearRow> rows_;

  std::vector<double> partial_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> scratch_;
  double gain_sum_ = 0.0;
  std::uint64_t nodes_ = 0;
};

}  // namespace

SolveOutcome solve_bruteforce(const PackageQuery& q, const ItemTable& table,
                              const SolverConfig& cfg) {
  const std::size_t n = table.size();
  if (n > cfg.max_items_bruteforce || n >= 63) {
    throw CapacityError("brute force limited to " +
                        std::to_string(cfg.max_items_bruteforce) +
                        " items, table has " + std::to_string(n));
  }
  q.validate_against(table);
  const auto columns = constraint_columns(q, table);
  const std::size_t objective_column = table.attribute_index(q.objective().attr);
  const std::size_t cap = implicit_size_cap(q, n, cfg);

  Incumbent incumbent(q.objective().direction);
  std::vector<std::size_t> rows;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    rows.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) rows.push_back(i);
    }
    if (rows.size() > cap) continue;
    sort_rows_by_id(rows, table);
    if (!rows_feasible(q, columns, rows, table, /*skip_base=*/false)) continue;
    incumbent.offer(sum_rows(objective_column, rows, table), rows, table);
  }
  return incumbent.release();
}

SolveResult solve(const PackageQuery& q, const ItemTable& table,
                  const SolverConfig& cfg) {
  q.validate_against(table);
  return BranchAndBound(q, table, cfg).run();
}

}  // namespace pkgrelax
