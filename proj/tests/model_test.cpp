#include "pkgrelax/model.hpp"

#include <gtest/gtest.h>

#include <random>

#include "pkgrelax/error.hpp"
#include "test_support.hpp"

namespace pkgrelax {
namespace {

using testing::make_table;

ItemTable meals() {
  // id, calories, cholesterol, prep_time
  return make_table({"calories", "cholesterol", "prep_time"},
                    {{400, 40, 30}, {500, 65, 10}, {100, 20, 5}, {700, 55, 45}});
}

TEST(ItemTable, RejectsDuplicateIds) {
  std::vector<Item> items = {{7, {1.0}}, {7, {2.0}}};
  try {
    ItemTable({"x"}, items);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(ItemTable, RejectsArityMismatchAndNonFinite) {
  EXPECT_THROW(ItemTable({"x", "y"}, {{1, {1.0}}}), ValidationError);
  EXPECT_THROW(ItemTable({"x"}, {{1, {std::nan("")}}}), ValidationError);
  EXPECT_THROW(ItemTable({"x", "x"}, {}), ValidationError);
}

TEST(ItemTable, LookupsAndSubset) {
  const ItemTable t = make_table({"a", "b"}, {{1, 2}, {3, 4}}, 10);
  EXPECT_EQ(t.attribute_index("b"), 1u);
  EXPECT_THROW(t.attribute_index("c"), SchemaError);
  EXPECT_EQ(t.row_of(11), 1u);
  EXPECT_FALSE(t.find_row(12).has_value());
  const std::vector<std::size_t> rows = {1};
  const ItemTable s = t.subset(rows);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.items()[0].id, 11u);
}

TEST(Package, SortsAndRejectsRepeats) {
  EXPECT_EQ(Package({5, 1, 3}).ids(), (std::vector<ItemId>{1, 3, 5}));
  EXPECT_THROW(Package({1, 2, 1}), ValidationError);
}

TEST(ConstraintFunction, GlobalSumOfThreeItems) {
  const ItemTable t = make_table({"calories"}, {{400}, {500}, {100}});
  const auto c = Constraint::global_sum("calories", Comparison::kGreaterEqual, 1500);
  EXPECT_EQ(evaluate_constraint_function(c, Package({1, 2, 3}), t), 1000.0);
}

TEST(ConstraintFunction, CardinalityCountsItems) {
  const auto c = Constraint::cardinality(Comparison::kGreaterEqual, 3);
  EXPECT_EQ(evaluate_constraint_function(c, Package({1, 2, 3, 4}), meals()), 4.0);
}

TEST(ConstraintFunction, BaseUsesWorstItem) {
  const ItemTable t = make_table({"cholesterol"}, {{40}, {65}, {20}});
  const auto le = Constraint::base("cholesterol", Comparison::kLessEqual, 60);
  EXPECT_EQ(evaluate_constraint_function(le, Package({1, 2, 3}), t), 65.0);
  const auto ge = Constraint::base("cholesterol", Comparison::kGreaterEqual, 30);
  EXPECT_EQ(evaluate_constraint_function(ge, Package({1, 2, 3}), t), 20.0);
}

TEST(ConstraintFunction, EmptyPackageIdentities) {
  const ItemTable t = meals();
  EXPECT_EQ(evaluate_constraint_function(
                Constraint::global_sum("calories", Comparison::kGreaterEqual, 10),
                Package(), t),
            0.0);
  EXPECT_EQ(evaluate_constraint_function(
                Constraint::cardinality(Comparison::kLessEqual, 2), Package(), t),
            0.0);
  const auto base = Constraint::base("cholesterol", Comparison::kLessEqual, 60);
  EXPECT_EQ(evaluate_constraint_function(base, Package(), t), 60.0);
  EXPECT_TRUE(satisfies(base, Package(), t));
}

TEST(ConstraintFunction, UnknownAttributeIsSchemaError) {
  const auto c = Constraint::global_sum("fiber", Comparison::kLessEqual, 1);
  EXPECT_THROW(evaluate_constraint_function(c, Package({1}), meals()), SchemaError);
}

TEST(Satisfies, CalorieExampleIsViolated) {
  const ItemTable t = make_table({"calories"}, {{400}, {500}, {100}});
  const auto c = Constraint::global_sum("calories", Comparison::kGreaterEqual, 1500);
  EXPECT_FALSE(satisfies(c, Package({1, 2, 3}), t));
}

TEST(Satisfies, BoundaryEqualityAndTolerance) {
  const auto card = Constraint::cardinality(Comparison::kGreaterEqual, 3);
  EXPECT_TRUE(satisfies(card, Package({1, 2, 3}), meals()));
  EXPECT_TRUE(compare_within_tolerance(1.0 + 5e-10, Comparison::kLessEqual, 1.0));
  EXPECT_FALSE(compare_within_tolerance(1.0 + 2e-9, Comparison::kLessEqual, 1.0));
  EXPECT_TRUE(compare_within_tolerance(1.0 - 5e-10, Comparison::kGreaterEqual, 1.0));
  EXPECT_FALSE(compare_within_tolerance(1.0 - 2e-9, Comparison::kGreaterEqual, 1.0));
}

// Worst-item satisfaction equals "every item satisfies the predicate",
// checked by enumerating random packages.
TEST(Satisfies, WorstItemRuleMatchesPerItemCheck) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const ItemTable t = testing::random_table(rng, 6, 1);
    const double beta = std::uniform_real_distribution<double>(0, 20)(rng);
    const Comparison op = trial % 2 ? Comparison::kLessEqual : Comparison::kGreaterEqual;
    const auto c = Constraint::base("a0", op, beta);
    const std::uint64_t mask = std::uniform_int_distribution<std::uint64_t>(0, 63)(rng);
    std::vector<ItemId> ids;
    bool every = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!(mask >> i & 1)) continue;
      ids.push_back(t.items()[i].id);
      every = every && compare_within_tolerance(t.value(i, 0), op, beta);
    }
    EXPECT_EQ(satisfies(c, Package(ids), t), every);
  }
}

TEST(ConstraintFunction, OrderIndependentOverItemSet) {
  const ItemTable t = meals();
  const auto c = Constraint::global_sum("calories", Comparison::kLessEqual, 0);
  EXPECT_EQ(evaluate_constraint_function(c, Package({4, 1, 3}), t),
            evaluate_constraint_function(c, Package({1, 3, 4}), t));
}

TEST(PackageQuery, RejectsMalformedConstraints) {
  const Objective o{Direction::kMinimize, Aggregate::kSum, "x"};
  Constraint card = Constraint::cardinality(Comparison::kLessEqual, 2);
  card.attr = "x";
  EXPECT_THROW(PackageQuery({card}, o), ContractError);
  EXPECT_THROW(PackageQuery({Constraint::global_sum("x", Comparison::kLessEqual,
                                                    INFINITY)},
                            o),
               ContractError);
  EXPECT_THROW(PackageQuery({}, Objective{Direction::kMinimize, Aggregate::kSum, ""}),
               ContractError);
}

TEST(PackageQuery, RetainingAndWithoutKeepOrder) {
  const Objective o{Direction::kMaximize, Aggregate::kSum, "x"};
  std::vector<Constraint> cs;
  for (int i = 0; i < 4; ++i) {
    cs.push_back(Constraint::cardinality(Comparison::kLessEqual, i + 1));
  }
  const PackageQuery q(cs, o);
  const PackageQuery r = q.without({0, 2});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.constraints()[0], cs[1]);
  EXPECT_EQ(r.constraints()[1], cs[3]);
  EXPECT_EQ(q.retaining({1, 3}), r);
  EXPECT_EQ(complement(4, {0, 2}), (ConstraintSet{1, 3}));
  EXPECT_EQ(r.objective(), o);
}

TEST(PackageQuery, ValidateAgainstSchema) {
  const PackageQuery q({Constraint::base("cholesterol", Comparison::kLessEqual, 60)},
                       Objective{Direction::kMinimize, Aggregate::kSum, "effort"});
  EXPECT_THROW(q.validate_against(meals()), SchemaError);
}

TEST(Constraint, Describe) {
  EXPECT_EQ(Constraint::base("cholesterol", Comparison::kLessEqual, 60).describe(),
            "each cholesterol <= 60");
  EXPECT_EQ(Constraint::global_sum("calories", Comparison::kGreaterEqual, 1500).describe(),
            "sum(calories) >= 1500");
  EXPECT_EQ(Constraint::cardinality(Comparison::kLessEqual, 4).describe(),
            "count(*) <= 4");
}

}  // namespace
}  // namespace pkgrelax
