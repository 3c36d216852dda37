#include "pkgrelax/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "pkgrelax/error.hpp"

namespace pkgrelax {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::string location(const std::string& source, std::size_t line,
                     std::size_t column) {
  return source + ": row " + std::to_string(line) + ", column " +
         std::to_string(column);
}

}  // namespace

ItemTable parse_items(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  bool have_header = false;
  std::vector<Item> items;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);

    if (!have_header) {
      if (cells.front() != "id") {
        throw ParseError(source + ": first header column must be 'id'");
      }
      for (std::size_t i = 1; i < cells.size(); ++i) {
        if (cells[i].empty()) {
          throw ParseError(location(source, line_no, i + 1) +
                           ": empty attribute name");
        }
        header.emplace_back(cells[i]);
      }
      have_header = true;
      continue;
    }

    if (cells.size() != header.size() + 1) {
      throw ParseError(source + ": row " + std::to_string(line_no) +
                       ": expected " + std::to_string(header.size() + 1) +
                       " cells, found " + std::to_string(cells.size()));
    }
    Item item;
    {
      const auto cell = cells.front();
      auto [ptr, ec] =
          std::from_chars(cell.data(), cell.data() + cell.size(), item.id);
      if (ec != std::errc() || ptr != cell.data() + cell.size() ||
          cell.empty()) {
        throw ParseError(location(source, line_no, 1) + ": invalid id '" +
                         std::string(cell) + "'");
      }
    }
    item.values.reserve(header.size());
    for (std::size_t i = 1; i < cells.size(); ++i) {
      const auto cell = cells[i];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() ||
          cell.empty() || !std::isfinite(v)) {
        throw ParseError(location(source, line_no, i + 1) +
                         ": not a finite number: '" + std::string(cell) + "'");
      }
      item.values.push_back(v);
    }
    items.push_back(std::move(item));
  }
  if (!have_header) throw ParseError(source + ": missing header row");
  return ItemTable(std::move(header), std::move(items));
}

ItemTable load_items(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return parse_items(in, path.string());
}

void write_items(const ItemTable& table, std::ostream& out) {
  out << "id";
  for (const auto& name : table.schema()) out << ',' << name;
  out << '\n';
  for (const auto& item : table.items()) {
    out << item.id;
    for (double v : item.values) out << ',' << format_real(v);
    out << '\n';
  }
}

void save_items(const ItemTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  write_items(table, out);
}

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

namespace {

const json& require(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(ctx + ": missing '" + key + "'");
  }
  return obj.at(key);
}

double as_real(const json& v, const std::string& ctx) {
  if (!v.is_number()) throw ParseError(ctx + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(ctx + ": number must be finite");
  return d;
}

std::string as_string(const json& v, const std::string& ctx) {
  if (!v.is_string()) throw ParseError(ctx + ": expected a string");
  return v.get<std::string>();
}

Comparison parse_op(const std::string& op, const std::string& ctx) {
  if (op == "<=") return Comparison::kLessEqual;
  if (op == ">=") return Comparison::kGreaterEqual;
  throw ParseError(ctx + ": unknown comparison '" + op + "'");
}

Constraint make_constraint(ConstraintKind kind, const std::string& attr,
                           Comparison op, double beta) {
  switch (kind) {
    case ConstraintKind::kBase:
      return Constraint::base(attr, op, beta);
    case ConstraintKind::kGlobal:
      return Constraint::global_sum(attr, op, beta);
    case ConstraintKind::kCardinality:
      break;
  }
  return Constraint::cardinality(op, beta);
}

void parse_constraint(const json& doc, const std::string& ctx,
                      std::vector<Constraint>& out) {
  if (!doc.is_object()) throw ParseError(ctx + ": expected an object");
  const std::string kind_name = as_string(require(doc, "kind", ctx), ctx);
  ConstraintKind kind;
  std::string default_agg;
  if (kind_name == "base") {
    kind = ConstraintKind::kBase;
  } else if (kind_name == "global") {
    kind = ConstraintKind::kGlobal;
    default_agg = "sum";
  } else if (kind_name == "cardinality") {
    kind = ConstraintKind::kCardinality;
    default_agg = "count";
  } else {
    throw ParseError(ctx + ": unknown constraint kind '" + kind_name + "'");
  }

  const std::string agg =
      doc.contains("agg") ? as_string(doc.at("agg"), ctx) : default_agg;
  if (agg != "sum" && agg != "count" && !agg.empty()) {
    throw ParseError(ctx + ": unknown aggregate '" + agg + "'");
  }
  if (agg != default_agg) {
    throw ParseError(ctx + ": aggregate '" + agg + "' is not valid for a " +
                     kind_name + " constraint");
  }

  std::string attr;
  if (kind == ConstraintKind::kCardinality) {
    if (doc.contains("attr")) {
      throw ParseError(ctx + ": cardinality constraints take no attribute");
    }
  } else {
    attr = as_string(require(doc, "attr", ctx), ctx);
    if (attr.empty()) throw ParseError(ctx + ": empty attribute name");
  }

  const bool has_between = doc.contains("between");
  const bool has_op = doc.contains("op");
  if (has_between == has_op) {
    throw ParseError(ctx + ": exactly one of 'op' or 'between' is required");
  }
  if (has_between) {
    const json& range = doc.at("between");
    if (!range.is_array() || range.size() != 2) {
      throw ParseError(ctx + ": 'between' must be [lo, hi]");
    }
    out.push_back(make_constraint(kind, attr, Comparison::kGreaterEqual,
                                  as_real(range[0], ctx)));
    out.push_back(make_constraint(kind, attr, Comparison::kLessEqual,
                                  as_real(range[1], ctx)));
    return;
  }
  const std::string op = as_string(doc.at("op"), ctx);
  const double value = as_real(require(doc, "value", ctx), ctx);
  if (op == "=" || op == "==") {
    out.push_back(make_constraint(kind, attr, Comparison::kGreaterEqual, value));
    out.push_back(make_constraint(kind, attr, Comparison::kLessEqual, value));
    return;
  }
  out.push_back(make_constraint(kind, attr, parse_op(op, ctx), value));
}

}  // namespace

PackageQuery parse_query(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("query: expected a JSON object");
  if (!doc.contains("objective")) throw ParseError("query: missing objective");
  const json& obj = doc.at("objective");
  const std::string octx = "query objective";

  Objective objective;
  const std::string direction = as_string(require(obj, "direction", octx), octx);
  if (direction == "minimize") {
    objective.direction = Direction::kMinimize;
  } else if (direction == "maximize") {
    objective.direction = Direction::kMaximize;
  } else {
    throw ParseError(octx + ": unknown direction '" + direction + "'");
  }
  const std::string agg =
      obj.contains("agg") ? as_string(obj.at("agg"), octx) : "sum";
  if (agg != "sum") throw ParseError(octx + ": unknown aggregate '" + agg + "'");
  objective.agg = Aggregate::kSum;
  objective.attr = as_string(require(obj, "attr", octx), octx);
  if (objective.attr.empty()) throw ParseError(octx + ": empty attribute");

  std::vector<Constraint> constraints;
  if (doc.contains("constraints")) {
    const json& list = doc.at("constraints");
    if (!list.is_array()) throw ParseError("query: 'constraints' must be a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      parse_constraint(list[i], "query constraint " + std::to_string(i),
                       constraints);
    }
  }
  return PackageQuery(std::move(constraints), std::move(objective));
}

PackageQuery load_query(const std::filesystem::path& path) {
  try {
    return parse_query(load_json(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

nlohmann::json query_to_json(const PackageQuery& q) {
  json constraints = json::array();
  for (const auto& c : q.constraints()) {
    json entry = {{"kind", to_string(c.kind)},
                  {"op", to_string(c.op)},
                  {"value", c.beta}};
    if (c.kind != ConstraintKind::kCardinality) entry["attr"] = c.attr;
    if (c.kind == ConstraintKind::kGlobal) entry["agg"] = "sum";
    if (c.kind == ConstraintKind::kCardinality) entry["agg"] = "count";
    constraints.push_back(std::move(entry));
  }
  return {{"objective",
           {{"direction", to_string(q.objective().direction)},
            {"agg", "sum"},
            {"attr", q.objective().attr}}},
          {"constraints", std::move(constraints)}};
}

DatasetSpec parse_dataset_spec(const nlohmann::json& doc) {
  const std::string ctx = "dataset spec";
  if (!doc.is_object()) throw ParseError(ctx + ": expected a JSON object");
  DatasetSpec spec;
  const json& n = require(doc, "n_items", ctx);
  if (!n.is_number_integer() || n.get<std::int64_t>() < 0) {
    throw ParseError(ctx + ": n_items must be a non-negative integer");
  }
  spec.n_items = n.get<std::size_t>();
  if (doc.contains("seed")) {
    const json& seed = doc.at("seed");
    if (!seed.is_number_integer()) throw ParseError(ctx + ": seed must be an integer");
    spec.seed = seed.is_number_unsigned()
                    ? seed.get<std::uint64_t>()
                    : static_cast<std::uint64_t>(seed.get<std::int64_t>());
  }
  const json& attrs = require(doc, "attributes", ctx);
  if (!attrs.is_array()) throw ParseError(ctx + ": attributes must be a list");
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const json& a = attrs[i];
    const std::string actx = ctx + " attribute " + std::to_string(i);
    AttributeSpec attr;
    attr.name = as_string(require(a, "name", actx), actx);
    if (attr.name.empty() || attr.name == "id") {
      throw ParseError(actx + ": invalid attribute name '" + attr.name + "'");
    }
    const std::string dist = as_string(require(a, "dist", actx), actx);
    if (dist == "uniform") {
      UniformDistribution u{as_real(require(a, "lo", actx), actx),
                            as_real(require(a, "hi", actx), actx)};
      if (u.lo > u.hi) throw ParseError(actx + ": lo must not exceed hi");
      attr.distribution = u;
    } else if (dist == "normal") {
      NormalDistribution nd{as_real(require(a, "mean", actx), actx),
                            as_real(require(a, "sd", actx), actx)};
      if (nd.sd < 0) throw ParseError(actx + ": sd must be non-negative");
      attr.distribution = nd;
    } else {
      throw ParseError(actx + ": unknown distribution '" + dist + "'");
    }
    spec.attributes.push_back(std::move(attr));
  }
  return spec;
}

nlohmann::json dataset_spec_to_json(const DatasetSpec& spec) {
  json attrs = json::array();
  for (const auto& a : spec.attributes) {
    if (const auto* u = std::get_if<UniformDistribution>(&a.distribution)) {
      attrs.push_back(
          {{"name", a.name}, {"dist", "uniform"}, {"lo", u->lo}, {"hi", u->hi}});
    } else {
      const auto& nd = std::get<NormalDistribution>(a.distribution);
      attrs.push_back({{"name", a.name},
                       {"dist", "normal"},
                       {"mean", nd.mean},
                       {"sd", nd.sd}});
    }
  }
  return {{"n_items", spec.n_items}, {"seed", spec.seed}, {"attributes", attrs}};
}

DatasetSpec load_dataset_spec(const std::filesystem::path& path) {
  try {
    return parse_dataset_spec(load_json(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ItemTable generate_dataset(const DatasetSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<std::uniform_real_distribution<double>> uniforms;
  std::vector<std::normal_distribution<double>> normals;
  // Index into `uniforms` or `normals` per attribute.
  std::vector<std::pair<bool, std::size_t>> route;
  std::vector<std::string> schema;
  for (const auto& a : spec.attributes) {
    schema.push_back(a.name);
    if (const auto* u = std::get_if<UniformDistribution>(&a.distribution)) {
      route.emplace_back(true, uniforms.size());
      uniforms.emplace_back(u->lo, u->hi);
    } else {
      const auto& nd = std::get<NormalDistribution>(a.distribution);
      route.emplace_back(false, normals.size());
      normals.emplace_back(nd.mean, nd.sd);
    }
  }

  std::vector<Item> items;
  items.reserve(spec.n_items);
  for (std::size_t i = 0; i < spec.n_items; ++i) {
    Item item;
    item.id = i + 1;
    item.values.reserve(route.size());
    for (std::size_t a = 0; a < route.size(); ++a) {
      const auto [uniform, index] = route[a];
      double v;
      if (uniform) {
        v = uniforms[index](rng);
      } else {
        const auto& nd =
            std::get<NormalDistribution>(spec.attributes[a].distribution);
        v = nd.sd == 0.0 ? nd.mean : normals[index](rng);
        v = std::clamp(v, nd.mean - 6 * nd.sd, nd.mean + 6 * nd.sd);
      }
      item.values.push_back(v);
    }
    items.push_back(std::move(item));
  }
  return ItemTable(std::move(schema), std::move(items));
}

}  // namespace pkgrelax
