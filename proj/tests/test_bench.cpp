#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "kadd/bench.hpp"

namespace kadd {
namespace {

BenchmarkPlan small_plan(unsigned workers) {
  BenchmarkPlan p;
  p.game = make_table_game(random_table(6, 12));
  p.methods = {parse_method_spec("svakadd:k=2"), parse_method_spec("permutation"), parse_method_spec("stratified"),
               parse_method_spec("kernelshap")};
  p.budgets = {10, 20, 40};
  p.repetitions = 5;
  p.seed_base = 3;
  p.workers = workers;
  return p;
}

std::string records_text(const BenchmarkResult& r) {
  std::ostringstream os;
  write_records_csv(r.records, os);
  return os.str();
}

TEST(Methods, Parsing) {
  EXPECT_EQ(parse_method_spec("svakadd:k=3"), (MethodSpec{Method::svakadd, 3}));
  EXPECT_EQ(parse_method_spec("svakadd").k, 2);
  EXPECT_EQ(parse_method_spec("kernelshap").k, 1);
  EXPECT_EQ(parse_method_spec("permutation").k, 0);
  EXPECT_EQ(parse_method_spec("svakadd:k=3").label(), "svakadd-k3");
  EXPECT_THROW(parse_method_spec("svarm"), std::invalid_argument);
  EXPECT_THROW(parse_method_spec("stratified-svarm"), std::invalid_argument);
  EXPECT_THROW(parse_method_spec("svakadd:k=x"), std::invalid_argument);
  EXPECT_THROW(parse_method_spec("permutation:k=2"), std::invalid_argument);
}

TEST(Benchmark, WorkerCountDoesNotChangeRecords) {
  const auto a = run_benchmark(small_plan(1));
  const auto b = run_benchmark(small_plan(4));
  EXPECT_EQ(records_text(a), records_text(b));
  EXPECT_EQ(a.records.size(), 4u * 3u * 5u);
  for (const auto& r : a.records) {
    EXPECT_LE(r.evaluations, r.budget);
    EXPECT_GE(r.mse, 0.0);
    EXPECT_EQ(r.wall_ms, 0.0);
  }
}

TEST(Benchmark, FullBudgetExactForSvakadd) {
  BenchmarkPlan p;
  p.game = make_table_game(random_table(6, 1));
  p.methods = {parse_method_spec("svakadd:k=3")};
  p.budgets = {64};
  p.repetitions = 3;
  p.solver.constraint_mode = ConstraintMode::eliminate;
  const auto r = run_benchmark(p);
  ASSERT_EQ(r.aggregates.size(), 1u);
  EXPECT_LE(r.aggregates[0].mean_mse, 1e-8);
}

TEST(Benchmark, AdditiveGameAllMethodsExact) {
  BenchmarkPlan p;
  p.game = make_additive({1, -2, 0.5, 3, -1, 2.5});
  p.methods = {parse_method_spec("svakadd:k=1"), parse_method_spec("permutation"), parse_method_spec("stratified"),
               parse_method_spec("kernelshap")};
  // at full budget every (player, size) stratum holds a sample
  p.budgets = {64};
  p.repetitions = 3;
  p.solver.constraint_mode = ConstraintMode::eliminate;
  for (const auto& a : run_benchmark(p).aggregates) EXPECT_LE(a.mean_mse, 1e-10) << a.label() << ' ' << a.budget;
}

TEST(Benchmark, Validation) {
  auto p = small_plan(1);
  p.budgets = {20, 10};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.budgets = {10, 65};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = small_plan(1);
  p.repetitions = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = small_plan(1);
  p.budgets = {4};
  EXPECT_THROW(p.validate(), std::invalid_argument);  // below permutation's n
  p = small_plan(1);
  p.methods.clear();
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Aggregate, MeanStderrMedian) {
  std::vector<BenchmarkRecord> recs;
  for (double m : {1.0, 2.0, 3.0, 10.0}) {
    BenchmarkRecord r;
    r.method = "svakadd";
    r.k = 2;
    r.budget = 8;
    r.mse = m;
    recs.push_back(r);
  }
  const auto rows = aggregate(recs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].mean_mse, 4.0);
  EXPECT_DOUBLE_EQ(rows[0].median_mse, 2.5);
  EXPECT_NEAR(rows[0].stderr_mse, std::sqrt(50.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(rows[0].reps, 4u);
}

TEST(Csv, EmptyRecordsGiveHeaderOnly) {
  std::ostringstream os;
  write_records_csv({}, os);
  EXPECT_EQ(os.str(), std::string(kRecordHeader) + "\n");
}

TEST(Csv, RoundTrip) {
  const auto r = run_benchmark(small_plan(1));
  std::stringstream ss(records_text(r));
  const auto back = read_records_csv(ss);
  ASSERT_EQ(back.size(), r.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].method, r.records[i].method);
    EXPECT_EQ(back[i].k, r.records[i].k);
    EXPECT_EQ(back[i].budget, r.records[i].budget);
    EXPECT_EQ(back[i].repetition, r.records[i].repetition);
    EXPECT_EQ(back[i].mse, r.records[i].mse);
    EXPECT_EQ(back[i].evaluations, r.records[i].evaluations);
    EXPECT_EQ(back[i].underdetermined, r.records[i].underdetermined);
  }
  std::istringstream bad("method,k\n");
  EXPECT_THROW(read_records_csv(bad), std::invalid_argument);
}

TEST(Csv, RowCounts) {
  BenchmarkPlan p;
  p.game = make_table_game(random_table(5, 2));
  p.methods = {parse_method_spec("svakadd:k=1"), parse_method_spec("permutation"), parse_method_spec("stratified")};
  p.budgets = {8, 12, 16, 24, 32};
  p.repetitions = 100;
  const auto r = run_benchmark(p);
  EXPECT_EQ(r.records.size(), 1500u);
  EXPECT_EQ(r.aggregates.size(), 15u);
}

TEST(Csv, AggregatePath) {
  EXPECT_EQ(aggregate_path("out/bench.csv"), "out/bench-agg.csv");
  EXPECT_EQ(aggregate_path("bench"), "bench-agg.csv");
  EXPECT_EQ(aggregate_path("a.b/bench"), "a.b/bench-agg.csv");
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t c = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++c;
  return c;
}

TEST(Svg, OneCurveTwoPoints) {
  const std::vector<AggregateRow> rows{{"svakadd", 2, 8, 1e-3, 0, 0, 1}, {"svakadd", 2, 16, 1e-5, 0, 0, 1}};
  const auto svg = render_svg(rows);
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  const std::regex pts("points=\"([^\"]*)\"");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, pts));
  EXPECT_EQ(count(m[1].str(), ","), 2u);
  EXPECT_NE(svg.find(">svakadd-k2<"), std::string::npos);
}

TEST(Svg, ZeroClampedToFloor) {
  const std::vector<AggregateRow> rows{{"svakadd", 3, 8, 0.0, 0, 0, 1}, {"svakadd", 3, 16, 1e-2, 0, 0, 1}};
  const auto svg = render_svg(rows);
  EXPECT_NE(svg.find(">1e-16<"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
}

TEST(Svg, LegendPerCurve) {
  const std::vector<AggregateRow> rows{{"svakadd", 2, 8, 1e-3, 0, 0, 1}, {"permutation", 0, 8, 1e-2, 0, 0, 1}};
  const auto svg = render_svg(rows);
  EXPECT_EQ(count(svg, "class=\"legend\""), 2u);
  EXPECT_NE(svg.find(">permutation-k0<"), std::string::npos);
  EXPECT_THROW(render_svg({}), std::invalid_argument);
}

}  // namespace
}  // namespace kadd
