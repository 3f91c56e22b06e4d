#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rfet/combinatorics.hpp"
#include "rfet/errors.hpp"

using namespace rfet;

TEST(Compositions, TwoOnTwoIsBinomial) {
  const auto comps = enumerate_compositions(2, 2);
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps[0].counts, (std::vector<int>{0, 2}));
  EXPECT_EQ(comps[1].counts, (std::vector<int>{1, 1}));
  EXPECT_EQ(comps[2].counts, (std::vector<int>{2, 0}));
  EXPECT_DOUBLE_EQ(comps[0].prob, 0.25);
  EXPECT_DOUBLE_EQ(comps[1].prob, 0.5);
  EXPECT_DOUBLE_EQ(comps[2].prob, 0.25);
}

TEST(Compositions, SingleDrawIsUniform) {
  const auto comps = enumerate_compositions(1, 3);
  ASSERT_EQ(comps.size(), 3u);
  for (const auto& c : comps) EXPECT_DOUBLE_EQ(c.prob, 1.0 / 3.0);
}

TEST(Compositions, FiveOnTenCountAndMass) {
  const auto comps = enumerate_compositions(5, 10);
  EXPECT_EQ(comps.size(), 2002u);
  CompensatedSum total;
  for (const auto& c : comps) {
    EXPECT_EQ(std::accumulate(c.counts.begin(), c.counts.end(), 0), 5);
    total.add(c.prob);
  }
  EXPECT_NEAR(total.value(), 1.0, 1e-14);
}

TEST(Compositions, ProbabilitiesMatchOrderedAssignments) {
  for (int n = 1; n <= 5; ++n) {
    for (int k = 1; k <= 4; ++k) {
      const CompositionTable table(n, k);
      for (std::size_t i = 0; i < table.size(); ++i) {
        const std::vector<int> target(table.counts(i).begin(), table.counts(i).end());
        const double p = oracle::expect_by_assignment(n, k, [&](std::span<const int> c) {
          return std::vector<int>(c.begin(), c.end()) == target ? 1.0 : 0.0;
        });
        EXPECT_NEAR(table.prob(i), p, 1e-15) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Compositions, CountFormula) {
  EXPECT_EQ(composition_count(5, 10), 2002u);
  EXPECT_EQ(composition_count(10, 2), 11u);
  EXPECT_EQ(composition_count(0, 4), 1u);
  EXPECT_EQ(composition_count(3, 1), 1u);
  EXPECT_EQ(composition_count(200, 200), UINT64_MAX);
}

TEST(Compositions, CapIsEnforced) {
  EXPECT_THROW(enumerate_compositions(20, 20, 1000), EnumerationLimitError);
  EXPECT_THROW(CompositionTable(20, 20, 1000), EnumerationLimitError);
  EXPECT_NO_THROW(CompositionTable(5, 10, 2002));
}

TEST(Compositions, RejectsBadArguments) {
  EXPECT_THROW(enumerate_compositions(-1, 2), DomainError);
  EXPECT_THROW(enumerate_compositions(2, 0), DomainError);
}

TEST(Compositions, LargeCountsStayNormalized) {
  // Direct factorials overflow here; the weights must not.
  const CompositionTable table(300, 2);
  double total = table.expect([](std::span<const int>) { return 1.0; });
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t i = 0; i < table.size(); ++i) EXPECT_TRUE(std::isfinite(table.prob(i)));
}

TEST(Expectation, ConstantIsOne) {
  EXPECT_NEAR(expect([](std::span<const int>) { return 1.0; }, 6, 4), 1.0, 4e-15);
}

TEST(Expectation, BinomialMean) {
  EXPECT_NEAR(expect([](std::span<const int> c) { return double(c[0]); }, 4, 2), 2.0, 1e-15);
}

TEST(Expectation, WelfareMatchesMonteCarlo) {
  const Market m(3, {0.2, 0.5, 0.7, 1.0}, 2.2);
  const std::vector<double> q{0.1, 0.2, 0.25, 0.4};
  const double exact =
      expect([&](std::span<const int> c) { return social_welfare(c, q, m); }, 3, 4);
  const auto mc = oracle::mc_welfare(q, m, 1'000'000, 5);
  EXPECT_LT(std::fabs(exact - mc.mean), 3.0 * mc.se);
}

TEST(Expectation, WeightedPrior) {
  const CompositionTable table(2, 2);
  const std::vector<double> w{1.0, 0.0, 0.0};  // all mass on (0, 2)
  EXPECT_DOUBLE_EQ(table.expect_weighted(w, [](std::span<const int> c) { return c[1]; }), 2.0);
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  EXPECT_EQ(s.value(), 2.0);

  CompensatedSum a, b;
  a.add(1e16);
  a.add(1.0);
  b.add(-1e16);
  b.add(1.0);
  a.merge(b);
  EXPECT_EQ(a.value(), 2.0);
}
