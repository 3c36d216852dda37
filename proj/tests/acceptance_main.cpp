// Acceptance run: one PASS/FAIL line per criterion. The first argument is
// the path of the pkgrelax executable, used by the determinism check.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pkgrelax/bench.hpp"
#include "pkgrelax/metrics.hpp"
#include "pkgrelax/relax.hpp"
#include "pkgrelax/solver.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace pkgrelax;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string str(double v) { return format_real(v); }

// Sweeps the removal count 0..|C| through the smallest level giving each.
std::vector<int> level_per_removal_count(std::size_t n) {
  std::vector<int> levels(n + 1, -1);
  for (int k = 0; k <= 100; ++k) {
    const std::size_t m = RelaxationLevel(k).removals(n);
    if (levels[m] < 0) levels[m] = k;
  }
  return levels;
}

Verdict oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  int mismatches = 0, feasible = 0;
  for (int i = 0; i < 200; ++i) {
    const ItemTable t = testing::random_table(rng, 1 + i % 12, 3);
    const PackageQuery q = testing::random_query(rng, t, 1 + i % 6);
    const SolveOutcome brute = solve_bruteforce(q, t);
    const SolveOutcome bnb = solve(q, t).outcome;
    // Exact equality on status, package and objective value.
    if (!(brute == bnb) || !(brute == testing::oracle_top1(q, t))) ++mismatches;
    feasible += brute.feasible();
  }
  return {mismatches == 0, "200 instances, " + std::to_string(feasible) +
                               " feasible, " + std::to_string(mismatches) +
                               " mismatches"};
}

Verdict relaxation_monotonicity() {
  std::mt19937_64 rng(20240602);
  int pairs = 0, violations = 0, draws = 0;
  while (pairs < 100) {
    ++draws;
    const ItemTable t = testing::random_table(rng, 12, 3);
    const PackageQuery q = testing::random_query(rng, t, 2 + draws % 5);
    const SolveOutcome base = solve(q, t).outcome;
    if (!base.feasible()) continue;
    // Random nonempty removal set, so C' is a proper subset of C.
    ConstraintSet removed;
    while (removed.empty()) {
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (std::bernoulli_distribution(0.5)(rng)) removed.push_back(i);
      }
    }
    const SolveOutcome relaxed = solve(q.without(removed), t).outcome;
    ++pairs;
    const bool ok = relaxed.feasible() &&
                    (q.objective().direction == Direction::kMaximize
                         ? relaxed.objective_value >= base.objective_value
                         : relaxed.objective_value <= base.objective_value);
    violations += !ok;
  }
  return {violations == 0, "100 pairs, " + std::to_string(violations) + " violations"};
}

Verdict mape_calorie_term() {
  const ItemTable t = testing::make_table({"calories"}, {{400}, {500}, {100}});
  const PackageQuery q(
      {Constraint::global_sum("calories", Comparison::kGreaterEqual, 1500)},
      Objective{Direction::kMinimize, Aggregate::kSum, "calories"});
  const double term = violation_term(1500, 1000) * 100;
  const double via_mape = mape_error(q, {0}, Package({1, 2, 3}), t).value * 100;
  const bool ok = std::abs(term - 100.0 / 3) <= 0.01 && std::abs(via_mape - 100.0 / 3) <= 0.01;
  return {ok, "term " + str(term) + "%, mape " + str(via_mape) + "%"};
}

struct Workload {
  WorkloadSpec spec;
  ItemTable table;
  std::vector<PackageQuery> queries;
};

Workload workload(WorkloadSpec spec) {
  Workload w{std::move(spec), {}, {}};
  w.table = load_workload_table(w.spec);
  w.queries = generate_queries(w.spec, w.table);
  return w;
}

Verdict level_monotonicity() {
  const Workload w = workload(WorkloadSpec{});
  const SolverConfig cfg = bench_solver_config(w.spec);
  int violations = 0;
  std::string sizes;
  for (const PackageQuery& q : w.queries) {
    const Relaxer relaxer(q, w.table, cfg);
    double previous = -1;
    for (int k : level_per_removal_count(q.size())) {
      const double now = relaxer.exhaustive_i(RelaxationLevel(k)).metrics.improvement;
      violations += now < previous;
      previous = now;
    }
    sizes += (sizes.empty() ? "" : ",") + std::to_string(q.size());
  }
  return {violations == 0, "10 queries with |C| = " + sizes + ", " +
                               std::to_string(violations) + " decreases"};
}

Verdict dominance() {
  int violations = 0, cells = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    WorkloadSpec spec;
    spec.seed = seed;
    const Workload w = workload(spec);
    const BenchReport report = run_curves(w.spec, w.table);
    for (std::size_t q = 0; q < report.queries.size(); ++q) {
      for (int level : w.spec.levels) {
        const BenchCell& ei = report.cell(q, level, Method::kExhaustiveI);
        const BenchCell& eie = report.cell(q, level, Method::kExhaustiveIE);
        ++cells;
        for (double trial : report.cell(q, level, Method::kRandom).trial_improvements) {
          violations += trial > ei.improvement;
        }
        violations += eie.score < ei.score;
        for (Method m : {Method::kGreedyI, Method::kGreedyIE, Method::kBidirectionalI,
                         Method::kBidirectionalIE}) {
          violations += eie.score < report.cell(q, level, m).score;
        }
      }
    }
  }
  return {violations == 0, std::to_string(cells) + " (query, level) cells over 3 workloads, " +
                               std::to_string(violations) + " violations"};
}

Verdict greedy_first_step() {
  int checked = 0, mismatches = 0;
  for (std::uint64_t seed : {11, 12, 13, 14, 15}) {
    WorkloadSpec spec;
    spec.seed = seed;
    const Workload w = workload(spec);
    const SolverConfig cfg = bench_solver_config(w.spec);
    for (const PackageQuery& q : w.queries) {
      const Relaxer relaxer(q, w.table, cfg);
      const RelaxationLevel one(level_per_removal_count(q.size())[1]);
      const RelaxationResult g = relaxer.greedy(one, Criterion::kImprovement);
      const RelaxationResult e = relaxer.exhaustive_i(one);
      mismatches += g.sequence.front() != e.removed.front();
      ++checked;
    }
  }
  return {mismatches == 0, std::to_string(checked) + " queries, " +
                               std::to_string(mismatches) + " mismatches"};
}

Verdict efficiency(std::vector<std::string>& notes) {
  WorkloadSpec spec;
  spec.constraints_min = spec.constraints_max = 8;
  spec.seed = 7;
  const Workload w = workload(spec);
  const Relaxer relaxer(w.queries.front(), w.table, bench_solver_config(w.spec));
  const std::uint64_t greedy_calls =
      relaxer.greedy(RelaxationLevel(50), Criterion::kImprovement).solver_calls;
  const std::uint64_t exhaustive_calls = relaxer.exhaustive_i(RelaxationLevel(50)).solver_calls;
  bool ok = greedy_calls == 26 && exhaustive_calls == 70;
  std::string detail = "m=4 of 8: greedy " + std::to_string(greedy_calls) + ", exhaustive " +
                       std::to_string(exhaustive_calls);

  const BenchReport report = run_curves(w.spec, w.table);
  auto mean_calls = [&](Method m, int level) {
    for (const CurvePoint& p : report.curves) {
      if (p.method == m && p.level == level) return p.mean_solver_calls;
    }
    return -1.0;
  };
  std::string failing, bidir_failing;
  for (int level : w.spec.levels) {
    const std::size_t m = RelaxationLevel(level).removals(8);
    if (m < 2 || m > 6) continue;
    const double ex = mean_calls(Method::kExhaustiveI, level);
    for (Method g : {Method::kGreedyI, Method::kGreedyIE}) {
      const double calls = mean_calls(g, level);
      if (!(calls < ex)) {
        ok = false;
        failing += " " + to_string(g) + "@" + std::to_string(level) + "(m=" +
                   std::to_string(m) + ": " + str(calls) + " vs " + str(ex) + ")";
      }
    }
    for (Method g : {Method::kBidirectionalI, Method::kBidirectionalIE}) {
      if (!(mean_calls(g, level) < ex)) bidir_failing += " " + to_string(g) + "@" + std::to_string(level);
    }
  }
  detail += failing.empty() ? "; bench greedy below exhaustive at every level"
                            : "; bench greedy not below exhaustive at" + failing;
  notes.push_back(std::string(bidir_failing.empty() ? "PASS" : "FAIL") +
                  " 7 (supplementary): bidirectional greedy below exhaustive at every "
                  "level with 2 <= removals <= |C|-2" +
                  (bidir_failing.empty() ? "" : ":" + bidir_failing));
  return {ok, detail};
}

Verdict curve_shape() {
  const Workload w = workload(WorkloadSpec{});
  const BenchReport report = run_curves(w.spec, w.table);
  int concave = 0;
  std::string per_query;
  for (std::size_t q = 0; q < report.queries.size(); ++q) {
    const std::size_t n = report.queries[q].size();
    const BenchCell* first = nullptr;
    for (int level : w.spec.levels) {
      const BenchCell& c = report.cell(q, level, Method::kExhaustiveI);
      if (c.removals >= 1) {
        first = &c;
        break;
      }
    }
    const double full = report.cell(q, 100, Method::kExhaustiveI).improvement;
    const double first_gain = first->improvement / static_cast<double>(first->removals);
    const double mean_gain = full / static_cast<double>(n);
    const bool ok = first_gain >= mean_gain;
    concave += ok;
    per_query += ok ? '+' : '-';
  }
  return {concave >= 8, std::to_string(concave) + "/10 queries concave-trending [" +
                            per_query + "]"};
}

Verdict optimal_reference() {
  int checked = 0, violations = 0;
  for (std::uint64_t seed : {21, 22, 23}) {
    WorkloadSpec spec;
    spec.seed = seed;
    spec.constraints_max = 6;
    const Workload w = workload(spec);
    const SolverConfig cfg = bench_solver_config(w.spec);
    for (const PackageQuery& q : w.queries) {
      const Relaxer relaxer(q, w.table, cfg);
      const double best = relaxer.optimal().metrics.score;
      ++checked;
      // Level 0 keeps every constraint, which is not a proper subset.
      for (int level = 10; level <= 100; level += 10) {
        for (Method m : all_methods()) {
          for (const auto& r : run_method(relaxer, m, RelaxationLevel(level), {}, 5, seed)) {
            violations += r.metrics.score > best;
          }
        }
      }
    }
  }
  return {violations == 0, std::to_string(checked) + " queries, " +
                               std::to_string(violations) + " violations"};
}

std::string read_without_wall_time(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line, out;
  int wall_column = -1;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (wall_column < 0) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].find("wall_time") != std::string::npos) wall_column = static_cast<int>(i);
      }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<int>(i) != wall_column) out += cells[i] + ',';
    }
    out += '\n';
  }
  return out;
}

Verdict determinism(const std::string& exe) {
  if (exe.empty()) return {false, "no pkgrelax executable given"};
  const fs::path dir = fs::temp_directory_path() / "pkgrelax_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "spec.json") << workload_spec_to_json(WorkloadSpec{}).dump(2);
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = dir / ("run" + std::to_string(run));
    const std::string cmd = "\"" + exe + "\" bench --spec \"" + (dir / "spec.json").string() +
                            "\" --out \"" + out.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "bench run failed: " + cmd};
    csv[run] = read_without_wall_time(out / "curves.csv");
  }
  fs::remove_all(dir);
  const bool ok = !csv[0].empty() && csv[0] == csv[1];
  return {ok, ok ? "two bench runs identical outside the wall-time column"
                 : "bench CSVs differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string exe = argc > 1 ? argv[1] : "";
  std::vector<std::string> notes;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"relaxation never worsens the objective", relaxation_monotonicity},
      {"calorie error term is 33.33%", mape_calorie_term},
      {"exhaustive-i improvement non-decreasing in removals", level_monotonicity},
      {"dominance of exhaustive search", dominance},
      {"greedy-i first step equals single-removal search", greedy_first_step},
      {"greedy solver calls below exhaustive", [&] { return efficiency(notes); }},
      {"concave-trending improvement curve", curve_shape},
      {"optimal relaxation dominates fixed levels", optimal_reference},
      {"bench determinism", [&] { return determinism(exe); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << ' ' << i + 1 << ' ' << criteria[i].first
              << ": " << v.detail << std::endl;
  }
  for (const std::string& note : notes) std::cout << note << '\n';
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << '\n';
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
