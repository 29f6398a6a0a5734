#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "kadd/exact.hpp"
#include "kadd/game.hpp"
#include "kadd/total_correlation.hpp"

namespace kadd {
namespace {

TEST(Games, AdditiveEval) {
  auto g = make_additive({1, 2, 3});
  EXPECT_DOUBLE_EQ((*g)(from_players({1, 3}, 3)), 4.0);
  EXPECT_DOUBLE_EQ((*g)(grand_coalition(3)), 6.0);
  auto zero = make_additive({0, 0});
  for (Coalition a : enumerate_all(2)) EXPECT_EQ((*zero)(a), 0.0);
  EXPECT_THROW(make_additive({}), std::invalid_argument);
}

TEST(Games, UnanimityEval) {
  auto g = make_unanimity(3, from_players({1, 2}, 3));
  EXPECT_EQ((*g)(from_players({1, 3}, 3)), 0.0);
  EXPECT_EQ((*g)(from_players({1, 2}, 3)), 1.0);
  EXPECT_EQ((*g)(grand_coalition(3)), 1.0);
  EXPECT_THROW(make_unanimity(3, Coalition{}), std::invalid_argument);
}

TEST(Games, GloveEval) {
  auto g = make_glove(3, from_players({1, 2}, 3));
  EXPECT_EQ((*g)(grand_coalition(3)), 1.0);
  EXPECT_EQ((*g)(Coalition{}), 0.0);
  EXPECT_EQ((*g)(from_players({1}, 3)), 0.0);
  EXPECT_EQ((*g)(from_players({1, 2}, 3)), 0.0);
  EXPECT_THROW(make_glove(3, Coalition{}), std::invalid_argument);
  EXPECT_THROW(make_glove(3, grand_coalition(3)), std::invalid_argument);
}

TEST(Games, RejectsCoalitionsBeyondN) {
  auto g = make_additive({1, 2});
  EXPECT_THROW((*g)(Coalition{0b100}), std::out_of_range);
}

TEST(Games, CacheCountsDistinctCoalitions) {
  auto g = make_table_game(random_table(5, 1));
  EXPECT_EQ(g->evaluations(), 0u);
  (*g)(Coalition{3});
  (*g)(Coalition{3});
  EXPECT_EQ(g->evaluations(), 1u);
  for (int rep = 0; rep < 3; ++rep)
    for (Coalition a : enumerate_all(5)) (*g)(a);
  EXPECT_EQ(g->evaluations(), 32u);
}

TEST(Games, SessionCountsPerRun) {
  auto g = make_table_game(random_table(4, 2));
  EvalSession s1(*g);
  s1(Coalition{1});
  s1(Coalition{1});
  s1(Coalition{2});
  EvalSession s2(*g);
  s2(Coalition{1});
  EXPECT_EQ(s1.evaluations(), 2u);
  EXPECT_EQ(s2.evaluations(), 1u);
  EXPECT_EQ(g->evaluations(), 2u);
  EXPECT_TRUE(s1.seen(Coalition{2}));
  EXPECT_FALSE(s2.seen(Coalition{2}));
}

TEST(Games, DeterministicValues) {
  auto g1 = make_table_game(random_table(6, 42));
  auto g2 = make_table_game(random_table(6, 42));
  for (Coalition a : enumerate_all(6)) EXPECT_EQ((*g1)(a), (*g2)(a));
}

TEST(Normalize, ShiftsByEmptyValue) {
  ValueTable t{2, {0.5, 0.7, 0.2, 1.0}};
  auto g = make_table_game(t);
  auto h = normalize(g);
  EXPECT_EQ((*h)(Coalition{}), 0.0);
  EXPECT_DOUBLE_EQ((*h)(grand_coalition(2)), 0.5);
  EXPECT_DOUBLE_EQ((*h)(grand_coalition(2)) - (*h)(Coalition{}), (*g)(grand_coalition(2)) - (*g)(Coalition{}));

  auto already = make_additive({1, -2, 3});
  auto same = normalize(already);
  for (Coalition a : enumerate_all(3)) EXPECT_EQ((*same)(a), (*already)(a));
}

TEST(Normalize, EmptyIsExactlyZero) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto h = normalize(make_table_game(random_table(4, seed)));
    EXPECT_EQ((*h)(Coalition{}), 0.0);
  }
}

TEST(ValueTableFile, RoundTripIsBitExact) {
  const auto t = random_table(5, 9);
  std::stringstream ss;
  save_value_table(t, ss);
  const auto back = read_value_table(ss);
  EXPECT_EQ(back.n, 5);
  EXPECT_EQ(back.values, t.values);
}

TEST(ValueTableFile, ArbitraryOrderAndComments) {
  std::istringstream is("# a game\nn=2\n11,3\n00,0\n# mid\n10,1\n01,2\n");
  const auto t = read_value_table(is);
  EXPECT_EQ(t[Coalition{0b01}], 1.0);  // "10" = player 1
  EXPECT_EQ(t[Coalition{0b10}], 2.0);
  EXPECT_EQ(t[Coalition{0b11}], 3.0);
}

TEST(ValueTableFile, Errors) {
  auto parse = [](const std::string& s) {
    std::istringstream is(s);
    return read_value_table(is);
  };
  try {
    parse("n=2\n00,0\n10,1\n01,2\n");
    FAIL() << "missing line accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("incomplete table"), std::string::npos);
  }
  EXPECT_THROW(parse("n=2\n00,0\n10,1\n01,2\n10,1\n11,3\n"), std::invalid_argument);  // duplicate
  EXPECT_THROW(parse("n=2\n00,0\n10,1\n01,nan\n11,3\n"), std::invalid_argument);
  EXPECT_THROW(parse("n=2\n00,0\n10,1\n01,inf\n11,3\n"), std::invalid_argument);
  EXPECT_THROW(parse("n=2\n00,0\n100,1\n01,2\n11,3\n"), std::invalid_argument);   // length
  EXPECT_THROW(parse("n=2\n00,0\n10,x\n01,2\n11,3\n"), std::invalid_argument);
  EXPECT_THROW(parse("00,0\n"), std::invalid_argument);
  EXPECT_THROW(parse(""), std::invalid_argument);
}

// ---------------------------------------------------------------------------

DataMatrix two_identical_binary_columns() {
  DataMatrix d;
  d.rows = 4;
  d.columns = {{0, 1, 0, 1}, {0, 1, 0, 1}};
  return d;
}

TEST(TotalCorrelation, HandComputedFixture) {
  auto g = total_correlation_game(two_identical_binary_columns());
  EXPECT_EQ((*g)(Coalition{}), 0.0);
  EXPECT_EQ((*g)(from_players({1}, 2)), 0.0);
  EXPECT_EQ((*g)(from_players({2}, 2)), 0.0);
  EXPECT_NEAR((*g)(grand_coalition(2)), std::numbers::ln2, 1e-15);
}

TEST(TotalCorrelation, LogBaseScales) {
  auto g = total_correlation_game(two_identical_binary_columns(), 2.0);
  EXPECT_NEAR((*g)(grand_coalition(2)), 1.0, 1e-15);
}

TEST(TotalCorrelation, NonnegativeAndDuplicateMonotone) {
  // column 3 duplicates column 1; column 2 is independent-ish noise
  DataMatrix d;
  d.rows = 8;
  d.columns = {{0, 1, 2, 0, 1, 2, 0, 1}, {1, 1, 0, 0, 1, 0, 1, 0}, {0, 1, 2, 0, 1, 2, 0, 1}};
  auto g = total_correlation_game(d);
  for (Coalition a : enumerate_all(3)) EXPECT_GE((*g)(a), -1e-12);
  // adding the duplicate partner never lowers the worth
  for (Coalition a : enumerate_all(3))
    if (a.contains(0) && !a.contains(2)) EXPECT_GE((*g)(a.with(2)), (*g)(a) - 1e-12);
  auto h = total_correlation_game(d);
  for (Coalition a : enumerate_all(3)) EXPECT_EQ((*g)(a), (*h)(a));
}

TEST(TotalCorrelation, RejectsEmptyData) {
  DataMatrix d;
  d.rows = 0;
  d.columns = {{}};
  EXPECT_THROW(total_correlation_game(d), std::invalid_argument);
}

TEST(Discretize, EqualWidth) {
  NumericTable t{{"a", "b", "c"}, {{0, 1, 2, 3}, {5, 5, 5, 5}, {0, 10, 0, 10}}};
  const auto d = discretize(t, 2);
  EXPECT_EQ(d.columns[0], (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(d.columns[1], (std::vector<int>{0, 0, 0, 0}));
  EXPECT_EQ(d.columns[2], (std::vector<int>{0, 1, 0, 1}));
  EXPECT_THROW(discretize(t, 1), std::invalid_argument);
}

TEST(Discretize, FewDistinctValuesKeepRanks) {
  NumericTable t{{"a"}, {{3.5, -1, 3.5, 7}}};
  EXPECT_EQ(discretize(t, 4).columns[0], (std::vector<int>{1, 0, 1, 2}));
}

TEST(Discretize, CsvReader) {
  std::istringstream ok("x,y\n1,2\n3,4.5\n");
  const auto t = read_numeric_csv(ok);
  EXPECT_EQ(t.cols(), 2u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.columns[1][1], 4.5);
  std::istringstream bad("x,y\n1,two\n");
  EXPECT_THROW(read_numeric_csv(bad), std::invalid_argument);
  std::istringstream ragged("x,y\n1\n");
  EXPECT_THROW(read_numeric_csv(ragged), std::invalid_argument);
}

}  // namespace
}  // namespace kadd
