#include "oracles.hpp"
#include "test_util.hpp"

#include "tfmlab/engine.hpp"

#include <gtest/gtest.h>

using namespace tfmlab;
using testutil::UniformGame;
using testutil::Within;

TEST(Rng, StreamsArePureFunctionsOfTheirKey)
{
  RngStream a(7, 11, 3);
  RngStream b(7, 11, 3);
  RngStream c(7, 11, 4);
  for (int i = 0; i < 5; ++i)
  {
    auto const x = a.NextU64();
    EXPECT_EQ(x, b.NextU64());
    EXPECT_NE(x, c.NextU64());
  }
  EXPECT_EQ(a.counter(), 5u);
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(1, "b"));
}

TEST(Rng, UniformRange)
{
  RngStream s(1, 1, 1);
  for (int i = 0; i < 10000; ++i)
  {
    double const u = s.NextUniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Engine, MomentsMerge)
{
  Moments all, left, right;
  for (int i = 0; i < 100; ++i)
  {
    double const x = 0.1 * i * i - i;
    all.Add(x);
    (i < 37 ? left : right).Add(x);
  }
  auto const merged = Moments::Merge(left, right);
  EXPECT_DOUBLE_EQ(merged.count, all.count);
  EXPECT_NEAR(merged.mean, all.mean, 1e-10);
  EXPECT_NEAR(merged.Variance(), all.Variance(), 1e-8);
}

TEST(Engine, ReplicationsIndependentOfWorkerCount)
{
  auto body = []() -> ReplicationBody {
    return [](RngStream &s, std::span<double> out) {
      out[0] = s.NextUniform();
      out[1] = out[0] * out[0];
    };
  };
  SetWorkerCount(1);
  auto const one = RunReplications(50000, 2, 99, "test", body);
  SetWorkerCount(4);
  auto const four = RunReplications(50000, 2, 99, "test", body);
  SetWorkerCount(1);
  for (int i = 0; i < 2; ++i)
  {
    EXPECT_EQ(one[i].mean, four[i].mean);
    EXPECT_EQ(one[i].m2, four[i].m2);
  }
  EXPECT_TRUE(Within(one[0].mean, 0.5, one[0].StdErr(), 4.0));
}

TEST(Engine, ReplicationCounterAdvances)
{
  auto const before = ReplicationCount();
  RunReplications(1000, 1, 1, "count", [] { return ReplicationBody([](RngStream &, std::span<double> out) { out[0] = 1; }); });
  EXPECT_EQ(ReplicationCount() - before, 1000u);
}

TEST(Engine, PlaySecondPriceByHand)
{
  auto const game    = UniformGame(MechanismKind::kCk1pa, 2);
  auto const profile = OnChainProfile::Symmetric(MinerStrategy::Compliant(0.5), UserStrategy::Truthful(), 2);
  auto const r       = PlayOnChain(game, profile, {0.9, 0.6});
  EXPECT_DOUBLE_EQ(r.miner_utility, 0.6);
  EXPECT_NEAR(r.user_utility[0], 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(r.user_utility[1], 0.0);
}

TEST(Engine, FabricatedBidIsPaidByTheMiner)
{
  // a fabricated winning bid pays itself; the miner nets zero on it
  auto const game    = UniformGame(MechanismKind::kCk1pa, 1);
  auto       profile = OnChainProfile::Symmetric(
    MinerStrategy::Composite({MinerStrategy::Compliant(0.0), MinerStrategy::Fabricate({0.7})}), UserStrategy::Truthful(),
    1);
  auto const r = PlayOnChain(game, profile, {0.9});
  EXPECT_DOUBLE_EQ(r.miner_utility, 0.7);
  EXPECT_NEAR(r.user_utility[0], 0.2, 1e-15);

  auto const lose = PlayOnChain(game, profile, {0.5});
  EXPECT_DOUBLE_EQ(lose.user_utility[0], 0.0);
  EXPECT_NEAR(lose.miner_utility, 0.0, 1e-15);
}

TEST(Engine, C2paRevenueSmallSample)
{
  auto const game    = UniformGame(MechanismKind::kCk1pa, 2);
  auto const profile = OnChainProfile::Symmetric(MinerStrategy::Compliant(0.5), UserStrategy::Truthful(), 2);
  auto const est     = EstimateRevenue(game, profile, 100000, 5);
  EXPECT_EQ(est.replications, 100000u);
  EXPECT_TRUE(Within(est.mean, oracle::kC2paRevenue, est.std_err, 4.0)) << est.mean << " ± " << est.std_err;
}

TEST(Engine, EipRevenueIsZeroAndPaymentsMatchOracle)
{
  MechanismConfig m;
  m.kind  = MechanismKind::kEip1559;
  m.price = 0.4;
  m.crypto = DefaultCrypto(m.kind);
  Game const game{m, ValueDistribution::Uniform(0.0, 1.0), 3};
  auto const profile = OnChainProfile::Symmetric(MinerStrategy::Compliant(0.0), UserStrategy::Truthful(), 3);
  auto const est     = EstimatePlay(game, profile, 50000, 3);
  EXPECT_EQ(est.revenue.mean, 0.0);
  EXPECT_EQ(est.revenue.std_err, 0.0);
  EXPECT_TRUE(Within(est.user_payments.mean, oracle::kEipRevenueP04N3, est.user_payments.std_err, 4.0));
}

TEST(Engine, PostedPriceAttackOnEip)
{
  auto const game    = UniformGame(MechanismKind::kEip1559, 2, 0.3);
  auto const profile = OnChainProfile::Symmetric(MinerStrategy::Compliant(0.0), UserStrategy::Truthful(), 2);
  auto const attack  = OffChainMechanism::PostedPrice(0.65);
  EXPECT_FALSE(attack.Respond(game, 0.7).abstain);

  OffChainWorkspace ws;
  std::vector<double> values{0.7, 0.9};
  PlayOffChain(game, profile, attack, values, ws);
  // two takers each pay 0.65 - 0.3 to the miner
  EXPECT_NEAR(ws.play.miner_utility, 0.7, 1e-12);
  EXPECT_NEAR(ws.play.user_utility[0], 0.05, 1e-12);

  // a user below the posted price does not pay and is censored
  values = {0.6, 0.9};
  PlayOffChain(game, profile, attack, values, ws);
  EXPECT_NEAR(ws.play.miner_utility, 0.35, 1e-12);
  EXPECT_DOUBLE_EQ(ws.play.user_utility[0], 0.0);

  auto const known = KnownOffChainAttacks(game);
  ASSERT_FALSE(known.empty());
  EXPECT_EQ(known.front().kind(), OffChainKind::kPostedPrice);
  EXPECT_NEAR(known.front().param(), 0.65, 1e-9);
}

TEST(Engine, ConstantRevenueOverNForEip)
{
  for (std::size_t n = 0; n <= 8; ++n)
  {
    auto const game = UniformGame(MechanismKind::kEip1559, n, 0.3);
    auto const est  = EstimateRevenue(game, OnChainProfile::Symmetric(MinerStrategy::Compliant(0.0),
                                                                      UserStrategy::Truthful(), n),
                                      2000, 1);
    EXPECT_EQ(est.mean, 0.0) << n;
  }
}

TEST(Engine, SimEstimateJson)
{
  Moments m;
  m.Add(1.0);
  m.Add(3.0);
  auto const j = SimEstimate::From(m, 42).ToJson();
  EXPECT_DOUBLE_EQ(j["mean"].get<double>(), 2.0);
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 42u);
}
