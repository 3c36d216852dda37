#include "pkgrelax/cli.hpp"

#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pkgrelax/bench.hpp"
#include "pkgrelax/error.hpp"
#include "pkgrelax/ingest.hpp"
#include "pkgrelax/relax.hpp"
#include "pkgrelax/solver.hpp"

namespace pkgrelax {

using nlohmann::json;

namespace {

PriorityWeights parse_weights(const std::string& text) {
  PriorityWeights w;
  std::stringstream in(text);
  std::string entry;
  while (std::getline(in, entry, ',')) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ParseError("--weights entry '" + entry + "' is not key=value");
    }
    const std::string key = entry.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(entry.substr(eq + 1), &used);
      if (used != entry.size() - eq - 1) throw std::invalid_argument(entry);
    } catch (const std::logic_error&) {
      throw ParseError("--weights value in '" + entry + "' is not a number");
    }
    if (key == "base") {
      w.base = value;
    } else if (key == "global") {
      w.global = value;
    } else if (key == "card" || key == "cardinality") {
      w.cardinality = value;
    } else {
      throw ParseError("--weights key '" + key +
                       "' is not one of base, global, card");
    }
  }
  try {
    w.validate();
  } catch (const ContractError& e) {
    throw ParseError(std::string("--weights: ") + e.what());
  }
  return w;
}

json outcome_items(const SolveOutcome& o) {
  json items = json::array();
  for (ItemId id : o.package.ids()) items.push_back(id);
  return items;
}

json solve_document(const PackageQuery& q, const SolveOutcome& o,
                    const ItemTable& table) {
  json constraints = json::array();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Constraint& c = q.constraints()[i];
    json entry = {{"index", i}, {"constraint", c.describe()}, {"bound", c.beta}};
    if (o.feasible()) {
      entry["value"] = evaluate_constraint_function(c, o.package, table);
      entry["satisfied"] = satisfies(c, o.package, table);
    }
    constraints.push_back(std::move(entry));
  }
  json doc = {{"status", o.feasible() ? "feasible" : "infeasible"},
              {"items", outcome_items(o)},
              {"objective_function", q.objective().describe()},
              {"constraints", std::move(constraints)}};
  doc["objective"] = o.feasible() ? json(o.objective_value) : json(nullptr);
  return doc;
}

void print_solve(const json& doc, std::ostream& out) {
  out << "status: " << doc["status"].get<std::string>() << '\n';
  out << "items:";
  for (const auto& id : doc["items"]) out << ' ' << id.get<ItemId>();
  out << '\n';
  out << "objective: " << doc["objective_function"].get<std::string>();
  if (!doc["objective"].is_null()) {
    out << " = " << format_real(doc["objective"].get<double>());
  }
  out << '\n';
  out << "constraints:\n";
  for (const auto& c : doc["constraints"]) {
    out << "  [" << c["index"].get<std::size_t>() << "] "
        << c["constraint"].get<std::string>();
    if (c.contains("value")) {
      out << "  value " << format_real(c["value"].get<double>()) << ", "
          << (c["satisfied"].get<bool>() ? "satisfied" : "violated");
    }
    out << '\n';
  }
}

json relax_document(const PackageQuery& q, const SolveOutcome& baseline,
                    const RelaxationResult& r) {
  json removed = json::array();
  for (std::size_t i : r.removed) {
    removed.push_back({{"index", i}, {"constraint", q.constraints()[i].describe()}});
  }
  json doc = {{"removed", std::move(removed)},
              {"sequence", r.sequence},
              {"status", r.outcome.feasible() ? "feasible" : "infeasible"},
              {"items", outcome_items(r.outcome)},
              {"improvement", r.metrics.improvement},
              {"error", r.metrics.error},
              {"score", r.metrics.score},
              {"violated", r.metrics.violated},
              {"solver_calls", r.solver_calls},
              {"flags", r.metrics.flags()}};
  doc["objective"] =
      r.outcome.feasible() ? json(r.outcome.objective_value) : json(nullptr);
  doc["original_objective"] =
      baseline.feasible() ? json(baseline.objective_value) : json(nullptr);
  return doc;
}

void print_relax(const json& r, std::ostream& out) {
  out << "removed:";
  if (r["removed"].empty()) out << " (none)";
  out << '\n';
  for (const auto& c : r["removed"]) {
    out << "  [" << c["index"].get<std::size_t>() << "] "
        << c["constraint"].get<std::string>() << '\n';
  }
  out << "status: " << r["status"].get<std::string>() << '\n';
  out << "items:";
  for (const auto& id : r["items"]) out << ' ' << id.get<ItemId>();
  out << '\n';
  auto real_or_none = [](const json& v) {
    return v.is_null() ? std::string("none") : format_real(v.get<double>());
  };
  out << "objective: " << real_or_none(r["objective"])
      << " (original " << real_or_none(r["original_objective"]) << ")\n";
  out << "improvement: " << format_real(r["improvement"].get<double>()) << '\n';
  out << "error: " << format_real(r["error"].get<double>()) << '\n';
  out << "score: " << format_real(r["score"].get<double>()) << '\n';
  out << "violated:";
  for (const auto& i : r["violated"]) out << ' ' << i.get<std::size_t>();
  out << '\n';
  out << "solver_calls: " << r["solver_calls"].get<std::uint64_t>() << '\n';
  if (!r["flags"].empty()) {
    out << "flags:";
    for (const auto& f : r["flags"]) out << ' ' << f.get<std::string>();
    out << '\n';
  }
}

struct Loaded {
  ItemTable table;
  PackageQuery query;
};

Loaded load_inputs(const std::string& data, const std::string& query) {
  Loaded in{load_items(data), load_query(query)};
  in.query.validate_against(in.table);
  return in;
}

int cmd_solve(const std::string& data, const std::string& query, bool as_json,
              std::ostream& out) {
  const Loaded in = load_inputs(data, query);
  const SolveResult result = solve(in.query, in.table);
  const json doc = solve_document(in.query, result.outcome, in.table);
  if (as_json) {
    out << doc.dump(2) << '\n';
  } else {
    print_solve(doc, out);
  }
  return result.outcome.feasible() ? kExitOk : kExitInfeasible;
}

int cmd_relax(const std::string& data, const std::string& query,
              const std::string& method_name, std::optional<int> level,
              bool optimal, const std::string& weights_text, int trials,
              std::uint64_t seed, bool as_json, std::ostream& out) {
  if (level.has_value() == optimal) {
    throw ParseError("relax needs exactly one of --level or --optimal");
  }
  std::optional<Method> method;
  if (!optimal) {
    if (method_name.empty()) throw ParseError("relax needs --method");
    method = parse_method(method_name);
    if (!method) throw ParseError("unknown method '" + method_name + "'");
  }
  const PriorityWeights weights =
      weights_text.empty() ? PriorityWeights{} : parse_weights(weights_text);
  const Loaded in = load_inputs(data, query);
  const Relaxer relaxer(in.query, in.table);

  std::vector<RelaxationResult> results;
  if (optimal) {
    results.push_back(relaxer.optimal());
  } else {
    results = run_method(relaxer, *method, RelaxationLevel(*level), weights,
                         trials, seed);
  }

  json doc = {{"method", optimal ? "optimal" : to_string(*method)},
              {"constraints", in.query.size()}};
  doc["level"] = level ? json(*level) : json(nullptr);
  json list = json::array();
  for (const auto& r : results) {
    list.push_back(relax_document(in.query, relaxer.baseline(), r));
  }
  if (as_json) {
    if (list.size() == 1) {
      doc.update(list.front());
    } else {
      doc["trials"] = std::move(list);
    }
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  out << "method: " << doc["method"].get<std::string>();
  if (level) out << ", level " << *level;
  out << ", " << in.query.size() << " constraints\n";
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list.size() > 1) out << "-- trial " << i << '\n';
    print_relax(list[i], out);
  }
  return kExitOk;
}

int cmd_bench(const std::string& spec_path, const std::string& out_dir,
              std::size_t threads, std::ostream& out) {
  const WorkloadSpec spec = load_workload_spec(spec_path);
  const BenchReport report = run_curves(spec, threads);
  const BenchOutputs outputs =
      write_bench_outputs(spec, report, out_dir, threads);
  out << outputs.curves_csv.string() << '\n'
      << outputs.manifest.string() << '\n';
  return kExitOk;
}

int cmd_gen(const std::string& spec_path, const std::string& out_path,
            std::ostream& out) {
  const DatasetSpec spec = load_dataset_spec(spec_path);
  save_items(generate_dataset(spec), out_path);
  out << out_path << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Package query solving and relaxation search", "pkgrelax"};
  app.require_subcommand(1, 1);

  std::string data, query, method, weights, spec_path, out_path;
  std::optional<int> level;
  bool optimal = false, as_json = false;
  int trials = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  auto* solve_cmd = app.add_subcommand("solve", "Solve a package query");
  solve_cmd->add_option("--data", data, "Item table CSV")->required();
  solve_cmd->add_option("--query", query, "Query JSON")->required();
  solve_cmd->add_flag("--json", as_json, "Print a JSON document");

  auto* relax_cmd = app.add_subcommand("relax", "Search query relaxations");
  relax_cmd->add_option("--data", data, "Item table CSV")->required();
  relax_cmd->add_option("--query", query, "Query JSON")->required();
  relax_cmd->add_option("--method", method,
                        "exhaustive-i|exhaustive-ie|greedy-i|greedy-ie|"
                        "bidirectional-i|bidirectional-ie|random");
  relax_cmd->add_option("--level", level, "Percentage of constraints to remove")
      ->check(CLI::Range(0, 100));
  relax_cmd->add_flag("--optimal", optimal,
                      "Global best relaxation over all proper subsets");
  relax_cmd->add_option("--weights", weights, "base=W,global=W,card=W");
  relax_cmd->add_option("--trials", trials, "Random search trials")
      ->check(CLI::PositiveNumber);
  relax_cmd->add_option("--seed", seed, "Random search seed");
  relax_cmd->add_flag("--json", as_json, "Print a JSON document");

  auto* bench_cmd = app.add_subcommand("bench", "Run the relaxation benchmark");
  bench_cmd->add_option("--spec", spec_path, "Workload JSON")->required();
  bench_cmd->add_option("--out", out_path, "Output directory")->required();
  bench_cmd->add_option("--threads", threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic item table");
  gen_cmd->add_option("--spec", spec_path, "Dataset JSON")->required();
  gen_cmd->add_option("--out", out_path, "Output CSV")->required();

  std::vector<const char*> argv{"pkgrelax"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(data, query, as_json, out);
    if (relax_cmd->parsed()) {
      return cmd_relax(data, query, method, level, optimal, weights, trials,
                       seed, as_json, out);
    }
    if (bench_cmd->parsed()) return cmd_bench(spec_path, out_path, threads, out);
    if (gen_cmd->parsed()) return cmd_gen(spec_path, out_path, out);
  } catch (const GenerationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitGeneration;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace pkgrelax
