#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pkgrelax/ingest.hpp"
#include "pkgrelax/relax.hpp"

namespace pkgrelax {

// Recipe-like attribute set used when a workload names no dataset.
DatasetSpec default_bench_dataset();

struct WorkloadSpec {
  std::size_t n_queries = 10;
  std::size_t constraints_min = 3;
  std::size_t constraints_max = 10;
  double objective_split = 0.5;  // fraction of minimize queries
  std::variant<DatasetSpec, std::filesystem::path> dataset =
      default_bench_dataset();
  std::vector<int> levels = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int random_trials = 20;
  std::uint64_t seed = 1;
  std::vector<Method> methods = all_methods();
  // Forwarded to SolverConfig::max_package_size_unbounded. Generated
  // cardinality upper bounds never exceed it.
  std::size_t max_package_size = 10;

  // Throws ContractError on out-of-range fields.
  void validate() const;
};

// Relative dataset paths resolve against `base_dir`.
WorkloadSpec parse_workload_spec(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir = {});
WorkloadSpec load_workload_spec(const std::filesystem::path& path);
nlohmann::json workload_spec_to_json(const WorkloadSpec& spec);

ItemTable load_workload_table(const WorkloadSpec& spec);

SolverConfig bench_solver_config(const WorkloadSpec& spec);

// Random queries in the style of a meal-plan request: a cardinality lower
// and upper bound plus base and global sum constraints whose bounds come
// from attribute quantiles. Every returned query is feasible. Throws
// GenerationError naming the query index when widening cannot make a draw
// feasible, ContractError on an empty table.
std::vector<PackageQuery> generate_queries(const WorkloadSpec& spec,
                                           const ItemTable& table);

// One (query, level, method) evaluation.
struct BenchCell {
  std::size_t query = 0;
  int level = 0;
  Method method = Method::kExhaustiveI;
  std::size_t constraints = 0;
  std::size_t removals = 0;
  bool ok = false;
  std::string failure;  // solver error text when !ok
  // Means over random trials; the single result otherwise.
  double improvement = 0.0;
  double error = 0.0;
  double score = 0.0;
  double solver_calls = 0.0;
  double wall_time_ms = 0.0;
  std::vector<double> trial_improvements;
};

struct CurvePoint {
  Method method = Method::kExhaustiveI;
  int level = 0;
  std::size_t queries_ok = 0;
  double mean_improvement = 0.0;
  double mean_error = 0.0;
  double mean_score = 0.0;
  double mean_solver_calls = 0.0;
  double mean_wall_time_ms = 0.0;
};

struct BenchReport {
  std::vector<PackageQuery> queries;
  std::vector<SolveOutcome> baselines;
  std::vector<BenchCell> cells;     // query-major, then level, then method
  std::vector<CurvePoint> curves;   // method-major (spec order), then level

  const BenchCell& cell(std::size_t query, int level, Method method) const;
};

// Evaluates every (query, level, method) cell, `threads` cells at a time.
// Solver errors are recorded per cell and excluded from the means.
BenchReport run_curves(const WorkloadSpec& spec, const ItemTable& table,
                       std::size_t threads = 1);
BenchReport run_curves(const WorkloadSpec& spec, std::size_t threads = 1);

// Columns: method, level, queries_ok, mean_improvement, mean_error,
// mean_score, mean_solver_calls, mean_wall_time_ms.
void write_curves_csv(const std::vector<CurvePoint>& curves, std::ostream& out);

nlohmann::json run_manifest(const WorkloadSpec& spec, const BenchReport& report,
                            std::size_t threads);

struct BenchOutputs {
  std::filesystem::path curves_csv;
  std::filesystem::path manifest;
};

// Writes curves.csv and manifest.json into `out_dir` (created if missing).
BenchOutputs write_bench_outputs(const WorkloadSpec& spec,
                                 const BenchReport& report,
                                 const std::filesystem::path& out_dir,
                                 std::size_t threads);

}  // namespace pkgrelax
