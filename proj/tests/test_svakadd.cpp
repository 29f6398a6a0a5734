#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "kadd/svakadd.hpp"
#include "oracles.hpp"

namespace kadd {
namespace {

TEST(InitialDistribution, Examples) {
  const auto p3 = initial_distribution(3);
  EXPECT_DOUBLE_EQ(p3[1], 0.5);
  EXPECT_DOUBLE_EQ(p3[2], 0.5);
  EXPECT_EQ(p3[0], 0.0);
  EXPECT_EQ(p3[3], 0.0);

  const auto p4 = initial_distribution(4);
  EXPECT_DOUBLE_EQ(p4[1], 4.0 / 11.0);
  EXPECT_DOUBLE_EQ(p4[2], 3.0 / 11.0);
  EXPECT_DOUBLE_EQ(p4[3], 4.0 / 11.0);
  // per coalition: size 2 is half as likely as size 1
  EXPECT_DOUBLE_EQ(p4[2] / 6.0, 0.5 * p4[1] / 4.0);

  for (int n = 2; n <= 20; ++n) {
    double s = 0;
    for (double x : initial_distribution(n)) s += x;
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
  EXPECT_THROW(initial_distribution(1), std::invalid_argument);
}

TEST(Sampler, ExhaustsWithoutRepeats) {
  CoalitionSampler s(3, 1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 6; ++i) {
    const Coalition a = s.draw();
    EXPECT_FALSE(a.empty());
    EXPECT_NE(a, grand_coalition(3));
    EXPECT_TRUE(seen.insert(a.bits).second);
  }
  EXPECT_EQ(s.remaining(), 0u);
  EXPECT_THROW(s.draw(), SamplerExhausted);
}

TEST(Sampler, ExhaustsLargerStrataThroughEnumeration) {
  CoalitionSampler s(8, 4);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 254; ++i) EXPECT_TRUE(seen.insert(s.draw().bits).second);
  EXPECT_THROW(s.draw(), SamplerExhausted);
}

TEST(Sampler, SameSeedSameSequence) {
  CoalitionSampler a(10, 99), b(10, 99);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(a.draw(), b.draw());
}

TEST(Sampler, StratumFrequencies) {
  const int n = 6;
  const int draws = 10000;
  const auto p = initial_distribution(n);
  std::vector<int> count(n + 1, 0);
  for (int d = 0; d < draws; ++d) {
    CoalitionSampler s(n, static_cast<std::uint64_t>(d));
    ++count[s.draw().size()];
  }
  double chi2 = 0;
  for (int a = 1; a < n; ++a) {
    const double expected = draws * p[a];
    const double se = std::sqrt(draws * p[a] * (1 - p[a]));
    EXPECT_LE(std::abs(count[a] - expected), 3 * se) << "size " << a;
    chi2 += (count[a] - expected) * (count[a] - expected) / expected;
  }
  EXPECT_LT(chi2, 18.47);  // 4 degrees of freedom, p = 0.001
}

TEST(Sampler, UniformWithinStratum) {
  std::mt19937_64 rng(5);
  std::vector<int> hits(64, 0);
  for (int t = 0; t < 20000; ++t) ++hits[random_coalition_of_size(6, 2, rng).bits];
  for (Coalition a : enumerate_size(6, 2)) {
    EXPECT_NEAR(hits[a.bits], 20000.0 / 15, 5 * std::sqrt(20000.0 / 15));
  }
}

TEST(Svakadd, BudgetIsExact) {
  auto g = make_table_game(random_table(8, 2));
  for (std::size_t t : {2u, 3u, 20u, 37u, 100u, 256u}) {
    const auto est = run_svakadd(*g, EstimatorConfig{2, t, 1, {}, false});
    EXPECT_EQ(est.evaluations, t);
  }
  EXPECT_THROW(run_svakadd(*g, EstimatorConfig{2, 257, 1, {}, false}), std::invalid_argument);
  EXPECT_THROW(run_svakadd(*g, EstimatorConfig{2, 1, 1, {}, false}), std::invalid_argument);
  EXPECT_THROW(run_svakadd(*g, EstimatorConfig{0, 10, 1, {}, false}), std::invalid_argument);
}

TEST(Svakadd, Deterministic) {
  auto g = make_table_game(random_table(9, 3));
  const auto a = run_svakadd(*g, EstimatorConfig{2, 120, 17, {}, false});
  const auto b = run_svakadd(*g, EstimatorConfig{2, 120, 17, {}, false});
  EXPECT_EQ(a.values, b.values);
}

TEST(Svakadd, FullBudgetIsExact) {
  SolverOptions elim;
  elim.constraint_mode = ConstraintMode::eliminate;
  for (int n = 3; n <= 8; ++n)
    for (int k = 1; k <= 3 && k <= n; ++k) {
      auto g = make_table_game(random_table(n, 300 + n));
      const auto truth = exact_shapley(*g);
      const auto est = run_svakadd(*g, EstimatorConfig{k, std::size_t{1} << n, 5, elim, false});
      EXPECT_LE(mse(est.values, truth), 1e-8) << n << ' ' << k;
      EXPECT_FALSE(est.underdetermined);
    }
}

TEST(Svakadd, AdditiveRecovery) {
  const std::vector<double> c{1, -2, 0.5, 3, -1, 2.5};
  auto g = make_additive(c);
  const auto est = run_svakadd(*g, EstimatorConfig{1, 12, 3, {}, false});
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(est.values[i], c[i], 1e-6);
}

TEST(Svakadd, UnderdeterminedIsFlagged) {
  auto g = make_table_game(random_table(8, 4));
  SolverOptions elim;
  elim.constraint_mode = ConstraintMode::eliminate;
  const auto est = run_svakadd(*g, EstimatorConfig{3, 30, 1, elim, true});
  EXPECT_TRUE(est.underdetermined);
  ASSERT_TRUE(est.interactions.has_value());
  EXPECT_EQ(est.interactions->coeffs.size(), basis_dimension(8, 3));
  double sum = 0;
  for (double x : est.values) sum += x;
  EXPECT_NEAR(sum, (*g)(grand_coalition(8)) - (*g)(Coalition{}), 1e-10);
}

}  // namespace
}  // namespace kadd
