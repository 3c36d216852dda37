#include "pkgrelax/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "pkgrelax/error.hpp"

namespace pkgrelax {

using nlohmann::json;

DatasetSpec default_bench_dataset() {
  DatasetSpec spec;
  spec.n_items = 80;
  spec.seed = 20160626;
  spec.attributes = {
      {"calories", NormalDistribution{450, 120}},
      {"protein", NormalDistribution{25, 8}},
      {"fat", NormalDistribution{18, 6}},
      {"carbs", NormalDistribution{50, 15}},
      {"sodium", UniformDistribution{50, 1200}},
      {"cholesterol", UniformDistribution{0, 150}},
      {"prep_time", UniformDistribution{5, 120}},
      {"cost", UniformDistribution{2, 20}},
  };
  return spec;
}

void WorkloadSpec::validate() const {
  if (constraints_min < 1) throw ContractError("constraints_min must be >= 1");
  if (constraints_max < constraints_min) {
    throw ContractError("constraints_max must be >= constraints_min");
  }
  if (!(objective_split >= 0.0 && objective_split <= 1.0)) {
    throw ContractError("objective_split must be in [0, 1]");
  }
  for (int k : levels) RelaxationLevel{k};
  if (random_trials < 1) throw ContractError("random_trials must be >= 1");
  if (max_package_size < 1) throw ContractError("max_package_size must be >= 1");
  if (methods.empty()) throw ContractError("at least one method is required");
}

namespace {

std::size_t get_count(const json& doc, const char* key, std::size_t fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ParseError(std::string("workload: '") + key +
                     "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

}  // namespace

WorkloadSpec parse_workload_spec(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ParseError("workload: expected a JSON object");
  WorkloadSpec spec;
  try {
    spec.n_queries = get_count(doc, "n_queries", spec.n_queries);
    spec.constraints_min = get_count(doc, "constraints_min", spec.constraints_min);
    spec.constraints_max = get_count(doc, "constraints_max", spec.constraints_max);
    spec.max_package_size =
        get_count(doc, "max_package_size", spec.max_package_size);
    if (doc.contains("objective_split")) {
      spec.objective_split = doc.at("objective_split").get<double>();
    }
    if (doc.contains("random_trials")) {
      spec.random_trials = doc.at("random_trials").get<int>();
    }
    if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("levels")) spec.levels = doc.at("levels").get<std::vector<int>>();
    if (doc.contains("methods")) {
      spec.methods.clear();
      for (const auto& name : doc.at("methods").get<std::vector<std::string>>()) {
        auto method = parse_method(name);
        if (!method) throw ParseError("workload: unknown method '" + name + "'");
        spec.methods.push_back(*method);
      }
    }
    if (doc.contains("dataset")) {
      const json& ds = doc.at("dataset");
      if (ds.is_string()) {
        std::filesystem::path path = ds.get<std::string>();
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        spec.dataset = path;
      } else {
        spec.dataset = parse_dataset_spec(ds);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("workload: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const ContractError& e) {
    throw ParseError(std::string("workload: ") + e.what());
  }
  return spec;
}

WorkloadSpec load_workload_spec(const std::filesystem::path& path) {
  try {
    return parse_workload_spec(load_json(path), path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

nlohmann::json workload_spec_to_json(const WorkloadSpec& spec) {
  json methods = json::array();
  for (Method m : spec.methods) methods.push_back(to_string(m));
  json doc = {{"n_queries", spec.n_queries},
              {"constraints_min", spec.constraints_min},
              {"constraints_max", spec.constraints_max},
              {"objective_split", spec.objective_split},
              {"levels", spec.levels},
              {"random_trials", spec.random_trials},
              {"seed", spec.seed},
              {"methods", methods},
              {"max_package_size", spec.max_package_size}};
  if (const auto* ds = std::get_if<DatasetSpec>(&spec.dataset)) {
    doc["dataset"] = dataset_spec_to_json(*ds);
  } else {
    doc["dataset"] = std::get<std::filesystem::path>(spec.dataset).string();
  }
  return doc;
}

ItemTable load_workload_table(const WorkloadSpec& spec) {
  if (const auto* ds = std::get_if<DatasetSpec>(&spec.dataset)) {
    return generate_dataset(*ds);
  }
  return load_items(std::get<std::filesystem::path>(spec.dataset));
}

SolverConfig bench_solver_config(const WorkloadSpec& spec) {
  SolverConfig cfg;
  cfg.max_package_size_unbounded = spec.max_package_size;
  return cfg;
}

namespace {

class QueryGenerator {
 public:
  QueryGenerator(const WorkloadSpec& spec, const ItemTable& table)
      : spec_(spec), table_(table), cfg_(bench_solver_config(spec)) {
    const std::size_t n_attrs = table.schema().size();
    sorted_.resize(n_attrs);
    for (std::size_t a = 0; a < n_attrs; ++a) {
      for (std::size_t row = 0; row < table.size(); ++row) {
        sorted_[a].push_back(table.value(row, a));
      }
      std::sort(sorted_[a].begin(), sorted_[a].end());
    }
  }

  PackageQuery generate(std::size_t index, Direction direction) {
    std::mt19937_64 rng(derive_seed(spec_.seed, 1, index));
    constexpr int kAttempts = 50;
    std::vector<Constraint> last;
    Objective objective;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      objective = draw_objective(rng, direction);
      last = draw_constraints(rng, objective);
      PackageQuery q(last, objective);
      if (solve(q, table_, cfg_).outcome.feasible()) return q;
    }
    constexpr int kWidenRounds = 20;
    for (int round = 0; round < kWidenRounds; ++round) {
      widen(last);
      PackageQuery q(last, objective);
      if (solve(q, table_, cfg_).outcome.feasible()) return q;
    }
    throw GenerationError("query " + std::to_string(index) +
                          " stayed infeasible after widening its bounds");
  }

 private:
  double quantile(std::size_t attr, double p) const {
    const auto& v = sorted_[attr];
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  }

  double spread(std::size_t attr) const {
    return sorted_[attr].back() - sorted_[attr].front();
  }

  static double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }

  static std::size_t pick(std::mt19937_64& rng, std::size_t lo,
                          std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }

  Objective draw_objective(std::mt19937_64& rng, Direction direction) {
    Objective o;
    o.direction = direction;
    o.agg = Aggregate::kSum;
    o.attr = table_.schema()[pick(rng, 0, table_.schema().size() - 1)];
    return o;
  }

  std::vector<Constraint> draw_constraints(std::mt19937_64& rng,
                                           const Objective& objective) {
    const std::size_t count =
        pick(rng, spec_.constraints_min, spec_.constraints_max);
    const std::size_t cap = std::min(spec_.max_package_size, table_.size());
    const std::size_t lower = std::min(pick(rng, 2, 4), cap);
    const std::size_t upper = std::min(lower + pick(rng, 0, 2), cap);

    std::vector<Constraint> out;
    out.push_back(Constraint::cardinality(Comparison::kGreaterEqual,
                                          static_cast<double>(lower)));
    if (count >= 2) {
      out.push_back(Constraint::cardinality(Comparison::kLessEqual,
                                            static_cast<double>(upper)));
    }

    std::vector<std::size_t> attrs;
    for (std::size_t a = 0; a < table_.schema().size(); ++a) {
      if (table_.schema()[a] != objective.attr) attrs.push_back(a);
    }
    if (attrs.empty()) attrs.push_back(table_.attribute_index(objective.attr));

    while (out.size() < count) {
      const std::size_t attr = attrs[pick(rng, 0, attrs.size() - 1)];
      const std::string& name = table_.schema()[attr];
      const bool is_base = uniform(rng, 0.0, 1.0) < 0.4;
      const bool at_most = uniform(rng, 0.0, 1.0) < 0.5;
      const Comparison op =
          at_most ? Comparison::kLessEqual : Comparison::kGreaterEqual;
      if (is_base) {
        const double p = at_most ? uniform(rng, 0.70, 0.97)
                                 : uniform(rng, 0.03, 0.30);
        out.push_back(Constraint::base(name, op, quantile(attr, p)));
      } else {
        const double size = uniform(rng, static_cast<double>(lower),
                                    static_cast<double>(upper));
        const double p = at_most ? uniform(rng, 0.40, 0.75)
                                 : uniform(rng, 0.25, 0.60);
        out.push_back(Constraint::global_sum(name, op, size * quantile(attr, p)));
      }
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
  }

  void widen(std::vector<Constraint>& constraints) const {
    const double cap =
        static_cast<double>(std::min(spec_.max_package_size, table_.size()));
    for (auto& c : constraints) {
      if (c.kind == ConstraintKind::kCardinality) {
        c.beta = c.op == Comparison::kLessEqual ? std::min(cap, c.beta + 1)
                                                : std::max(1.0, c.beta - 1);
        continue;
      }
      const std::size_t attr = table_.attribute_index(c.attr);
      double step = 0.25 * std::abs(c.beta) + 0.1 * spread(attr);
      if (c.kind == ConstraintKind::kGlobal) step += 0.1 * cap * spread(attr);
      c.beta += c.op == Comparison::kLessEqual ? step : -step;
    }
  }

  const WorkloadSpec& spec_;
  const ItemTable& table_;
  SolverConfig cfg_;
  std::vector<std::vector<double>> sorted_;
};

}  // namespace

std::vector<PackageQuery> generate_queries(const WorkloadSpec& spec,
                                           const ItemTable& table) {
  spec.validate();
  if (table.empty() || table.schema().empty()) {
    throw ContractError("query generation needs a non-empty table");
  }
  const auto n_min = static_cast<std::size_t>(
      std::floor(spec.objective_split * static_cast<double>(spec.n_queries) + 0.5));
  std::vector<Direction> directions(spec.n_queries, Direction::kMaximize);
  std::fill_n(directions.begin(), std::min(n_min, spec.n_queries),
              Direction::kMinimize);
  std::mt19937_64 rng(derive_seed(spec.seed, 0));
  std::shuffle(directions.begin(), directions.end(), rng);

  QueryGenerator generator(spec, table);
  std::vector<PackageQuery> queries;
  queries.reserve(spec.n_queries);
  for (std::size_t i = 0; i < spec.n_queries; ++i) {
    queries.push_back(generator.generate(i, directions[i]));
  }
  return queries;
}

const BenchCell& BenchReport::cell(std::size_t query, int level,
                                   Method method) const {
  for (const auto& c : cells) {
    if (c.query == query && c.level == level && c.method == method) return c;
  }
  throw ContractError("no bench cell for query " + std::to_string(query) +
                      ", level " + std::to_string(level) + ", method " +
                      to_string(method));
}

namespace {

void fill_cell(BenchCell& cell, const std::vector<RelaxationResult>& results) {
  const double count = static_cast<double>(results.size());
  for (const auto& r : results) {
    cell.improvement += r.metrics.improvement;
    cell.error += r.metrics.error;
    cell.score += r.metrics.score;
    cell.solver_calls += static_cast<double>(r.solver_calls);
    cell.wall_time_ms +=
        std::chrono::duration<double, std::milli>(r.wall_time).count();
    cell.trial_improvements.push_back(r.metrics.improvement);
  }
  cell.improvement /= count;
  cell.error /= count;
  cell.score /= count;
  cell.solver_calls /= count;
  cell.wall_time_ms /= count;
  cell.ok = true;
}

}  // namespace

BenchReport run_curves(const WorkloadSpec& spec, const ItemTable& table,
                       std::size_t threads) {
  spec.validate();
  const SolverConfig cfg = bench_solver_config(spec);
  BenchReport report;
  report.queries = generate_queries(spec, table);

  std::vector<Relaxer> relaxers;
  relaxers.reserve(report.queries.size());
  for (const auto& q : report.queries) {
    relaxers.emplace_back(q, table, cfg);
    report.baselines.push_back(relaxers.back().baseline());
  }

  for (std::size_t qi = 0; qi < report.queries.size(); ++qi) {
    for (int level : spec.levels) {
      for (Method method : spec.methods) {
        BenchCell cell;
        cell.query = qi;
        cell.level = level;
        cell.method = method;
        cell.constraints = report.queries[qi].size();
        cell.removals = RelaxationLevel(level).removals(cell.constraints);
        report.cells.push_back(std::move(cell));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < report.cells.size(); i = next++) {
      BenchCell& cell = report.cells[i];
      try {
        const auto results = run_method(
            relaxers[cell.query], cell.method, RelaxationLevel(cell.level), {},
            spec.random_trials,
            derive_seed(spec.seed, 2, cell.query,
                        static_cast<std::uint64_t>(cell.level)));
        fill_cell(cell, results);
      } catch (const Error& e) {
        cell.ok = false;
        cell.failure = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (Method method : spec.methods) {
    for (int level : spec.levels) {
      CurvePoint point;
      point.method = method;
      point.level = level;
      for (const auto& cell : report.cells) {
        if (cell.method != method || cell.level != level || !cell.ok) continue;
        ++point.queries_ok;
        point.mean_improvement += cell.improvement;
        point.mean_error += cell.error;
        point.mean_score += cell.score;
        point.mean_solver_calls += cell.solver_calls;
        point.mean_wall_time_ms += cell.wall_time_ms;
      }
      if (point.queries_ok > 0) {
        const double n = static_cast<double>(point.queries_ok);
        point.mean_improvement /= n;
        point.mean_error /= n;
        point.mean_score /= n;
        point.mean_solver_calls /= n;
        point.mean_wall_time_ms /= n;
      }
      report.curves.push_back(point);
    }
  }
  return report;
}

BenchReport run_curves(const WorkloadSpec& spec, std::size_t threads) {
  const ItemTable table = load_workload_table(spec);
  return run_curves(spec, table, threads);
}

void write_curves_csv(const std::vector<CurvePoint>& curves,
                      std::ostream& out) {
  out << "method,level,queries_ok,mean_improvement,mean_error,mean_score,"
         "mean_solver_calls,mean_wall_time_ms\n";
  for (const auto& p : curves) {
    char wall[64];
    std::snprintf(wall, sizeof(wall), "%.3f", p.mean_wall_time_ms);
    out << to_string(p.method) << ',' << p.level << ',' << p.queries_ok << ','
        << format_real(p.mean_improvement) << ',' << format_real(p.mean_error)
        << ',' << format_real(p.mean_score) << ','
        << format_real(p.mean_solver_calls) << ',' << wall << '\n';
  }
}

nlohmann::json run_manifest(const WorkloadSpec& spec, const BenchReport& report,
                            std::size_t threads) {
  json queries = json::array();
  for (std::size_t i = 0; i < report.queries.size(); ++i) {
    json q = query_to_json(report.queries[i]);
    q["baseline_objective"] = report.baselines[i].objective_value;
    queries.push_back(std::move(q));
  }
  json failures = json::array();
  for (const auto& cell : report.cells) {
    if (cell.ok) continue;
    failures.push_back({{"query", cell.query},
                        {"level", cell.level},
                        {"method", to_string(cell.method)},
                        {"error", cell.failure}});
  }
  return {{"workload", workload_spec_to_json(spec)},
          {"seed", spec.seed},
          {"threads", threads},
          {"curves", "curves.csv"},
          {"queries", std::move(queries)},
          {"failed_cells", std::move(failures)}};
}

BenchOutputs write_bench_outputs(const WorkloadSpec& spec,
                                 const BenchReport& report,
                                 const std::filesystem::path& out_dir,
                                 std::size_t threads) {
  std::filesystem::create_directories(out_dir);
  BenchOutputs outputs{out_dir / "curves.csv", out_dir / "manifest.json"};
  {
    std::ofstream csv(outputs.curves_csv);
    if (!csv) throw ParseError("cannot write " + outputs.curves_csv.string());
    write_curves_csv(report.curves, csv);
  }
  {
    std::ofstream manifest(outputs.manifest);
    if (!manifest) throw ParseError("cannot write " + outputs.manifest.string());
    manifest << run_manifest(spec, report, threads).dump(2) << '\n';
  }
  return outputs;
}

}  // namespace pkgrelax
