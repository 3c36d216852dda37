#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pkgrelax/model.hpp"

namespace pkgrelax {

// Item tables: CSV with a header row whose first column is `id`; every other
// column is a numeric attribute. Parse errors carry the 1-based line and
// column.
ItemTable load_items(const std::filesystem::path& path);
ItemTable parse_items(std::istream& in, const std::string& source = "<csv>");
void write_items(const ItemTable& table, std::ostream& out);
void save_items(const ItemTable& table, const std::filesystem::path& path);

// Query documents:
//   {"objective": {"direction": "minimize", "agg": "sum", "attr": "prep_time"},
//    "constraints": [
//      {"kind": "base", "attr": "cholesterol", "op": "<=", "value": 60},
//      {"kind": "cardinality", "agg": "count", "between": [3, 4]},
//      {"kind": "global", "attr": "calories", "agg": "sum", "op": ">=",
//       "value": 1500}]}
// `between: [lo, hi]` expands in place to `>= lo` followed by `<= hi`.
// Attribute names are checked later, against a table, by
// PackageQuery::validate_against.
PackageQuery load_query(const std::filesystem::path& path);
PackageQuery parse_query(const nlohmann::json& doc);
nlohmann::json query_to_json(const PackageQuery& q);

struct UniformDistribution {
  double lo = 0.0;
  double hi = 1.0;
};

// Draws are clamped to mean +/- 6 sd.
struct NormalDistribution {
  double mean = 0.0;
  double sd = 1.0;
};

using Distribution = std::variant<UniformDistribution, NormalDistribution>;

struct AttributeSpec {
  std::string name;
  Distribution distribution;
};

struct DatasetSpec {
  std::size_t n_items = 0;
  std::vector<AttributeSpec> attributes;
  std::uint64_t seed = 0;
};

// Ids are 1..n_items. Bitwise deterministic for a fixed spec.
ItemTable generate_dataset(const DatasetSpec& spec);

// {"n_items": 100, "seed": 7, "attributes": [
//    {"name": "calories", "dist": "normal", "mean": 450, "sd": 150},
//    {"name": "prep_time", "dist": "uniform", "lo": 5, "hi": 90}]}
DatasetSpec parse_dataset_spec(const nlohmann::json& doc);
nlohmann::json dataset_spec_to_json(const DatasetSpec& spec);
DatasetSpec load_dataset_spec(const std::filesystem::path& path);

// Reads a whole JSON file; ParseError on I/O or syntax failure.
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace pkgrelax
