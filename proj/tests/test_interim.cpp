#include "oracles.hpp"
#include "test_util.hpp"

#include "tfmlab/error.hpp"
#include "tfmlab/interim.hpp"

#include <gtest/gtest.h>

using namespace tfmlab;
using testutil::UniformGame;
using testutil::Within;

namespace {

OnChainProfile TruthfulAt(double reserve, std::size_t n)
{
  return OnChainProfile::Symmetric(MinerStrategy::Compliant(reserve), UserStrategy::Truthful(), n);
}

}  // namespace

TEST(Interim, SecondPriceRulesMatchOracle)
{
  auto const game  = UniformGame(MechanismKind::kCk1pa, 2);
  auto const grid  = std::vector<double>{0.25, 0.5, 0.75, 1.0};
  auto const rules = ComputeInterimRules(game, TruthfulAt(0.5, 2), 0, grid, 40000, 3);
  ASSERT_EQ(rules.x.size(), grid.size());
  EXPECT_DOUBLE_EQ(rules.x[0], 0.0);
  EXPECT_DOUBLE_EQ(rules.p[0], 0.0);
  EXPECT_TRUE(Within(rules.x[2], oracle::kInterimX075, rules.se_x[2], 4.0));
  EXPECT_TRUE(Within(rules.p[2], oracle::kInterimP075, rules.se_p[2], 4.0));
  EXPECT_TRUE(Within(rules.p[3], oracle::InterimPayment(0.5, 1.0), rules.se_p[3], 4.0));
}

TEST(Interim, PaymentIdentityHoldsForTruthfulSecondPrice)
{
  auto const game   = UniformGame(MechanismKind::kCk1pa, 2);
  auto const rules  = ComputeInterimRules(game, TruthfulAt(0.5, 2), 0, SupportGrid(game.dist, 21), 50000, 4);
  auto const report = CheckPaymentIdentity(rules, 0.01);
  EXPECT_TRUE(report.pass) << report.worst_excess << " at " << report.worst_v;
}

TEST(Interim, PaymentIdentityFailsForTruthfulPayYourBid)
{
  // truthful bidding is not an equilibrium of pay-your-bid, and the identity notices
  auto const game   = UniformGame(MechanismKind::kWinnerPaysBid, 2);
  auto const rules  = ComputeInterimRules(game, TruthfulAt(0.0, 2), 0, SupportGrid(game.dist, 21), 50000, 4);
  auto const report = CheckPaymentIdentity(rules, 0.01);
  EXPECT_FALSE(report.pass);
}

TEST(Interim, NonMonotoneAllocationThrows)
{
  InterimRules rules;
  rules.grid = {0.0, 0.5, 1.0};
  rules.x    = {0.0, 0.8, 0.2};
  rules.p    = {0.0, 0.1, 0.1};
  rules.se_x = {0.0, 0.0, 0.0};
  rules.se_p = {0.0, 0.0, 0.0};
  EXPECT_THROW(CheckPaymentIdentity(rules, 0.01), MonotonicityViolation);
}

TEST(Interim, ExactRulesPassWithZeroTolerance)
{
  // x(v) = v, p(v) = v²/2 on a fine grid: only the trapezoid allowance remains
  InterimRules rules;
  for (int i = 0; i <= 100; ++i)
  {
    double const v = i / 100.0;
    rules.grid.push_back(v);
    rules.x.push_back(v);
    rules.p.push_back(v * v / 2.0);
    rules.se_x.push_back(0.0);
    rules.se_p.push_back(0.0);
  }
  EXPECT_TRUE(CheckPaymentIdentity(rules, 0.0).pass);
  rules.p[50] += 0.01;
  EXPECT_FALSE(CheckPaymentIdentity(rules, 0.0).pass);
}

TEST(Interim, RevenueEqualsVirtualWelfareSecondPrice)
{
  auto const game = UniformGame(MechanismKind::kCk1pa, 2);
  auto const r    = RevenueEqualsVirtualWelfare(game, TruthfulAt(0.5, 2), 100000, 8);
  EXPECT_TRUE(Within(r.lhs.mean, oracle::kC2paRevenue, r.lhs.std_err, 4.0));
  EXPECT_TRUE(Within(r.rhs.mean, oracle::kC2paRevenue, r.rhs.std_err, 4.0));
  EXPECT_TRUE(r.Within(4.0));
}

TEST(Interim, BenchmarkQuadrature)
{
  auto const d = ValueDistribution::Uniform(0.0, 1.0);
  EXPECT_NEAR(OptimalRevenueQuadrature(d, 2, 1, 0.0), oracle::kC2paRevenue, 1e-6);
  // unlimited capacity, burn 0.3, four users: 4 · 0.35²
  EXPECT_NEAR(OptimalRevenueQuadrature(d, 4, kUnlimited, 0.3), 0.49, 1e-6);
  EXPECT_DOUBLE_EQ(OptimalRevenueQuadrature(d, 0, 1, 0.0), 0.0);
  auto const report = OptimalRevenueBenchmarkReport(d, 2, 1, 0.0, 100000, 1);
  EXPECT_TRUE(Within(report.value, report.quadrature, report.std_err, 4.0));
}

TEST(Interim, BenchmarkSampleKeepsTopK)
{
  auto const          d = ValueDistribution::Uniform(0.0, 1.0);
  std::vector<double> scratch;
  std::vector<double> values{0.9, 0.8, 0.4};
  // φ = 0.8, 0.6, -0.2
  EXPECT_NEAR(BenchmarkSample(d, values, 1, 0.0, scratch), 0.8, 1e-12);
  EXPECT_NEAR(BenchmarkSample(d, values, 5, 0.0, scratch), 1.4, 1e-12);
  EXPECT_NEAR(BenchmarkSample(d, values, 5, 0.7, scratch), 0.1, 1e-12);
}

TEST(Interim, RevenueEquivalenceCheck)
{
  SimEstimate a{0.5, 0.01, 1000, 1};
  SimEstimate b{0.53, 0.01, 1000, 2};
  EXPECT_TRUE(CheckRevenueEquivalence(a, b, 3.0).pass);
  b.mean = 0.56;
  EXPECT_FALSE(CheckRevenueEquivalence(a, b, 3.0).pass);
}
