#include "oracles.hpp"
#include "test_util.hpp"

#include "tfmlab/checkers.hpp"
#include "tfmlab/config.hpp"
#include "tfmlab/error.hpp"

#include <gtest/gtest.h>

using namespace tfmlab;
using testutil::Scenario;
using testutil::Within;

namespace {

CheckContext SmallContext(std::string const &rel, std::uint64_t reps = 20000)
{
  auto cfg = LoadScenario(Scenario(rel));
  cfg.reps = reps;
  auto ctx = cfg.MakeContext(DeriveSeed(cfg.seed, ScenarioHash(cfg)));
  ctx.budget.collusion_screen_reps = 2000;
  return ctx;
}

struct RowCase
{
  char const *file;
  bool        off_chain;
  bool        user;
  bool        miner;
};

std::ostream &operator<<(std::ostream &os, RowCase const &c)
{
  return os << c.file;
}

bool Passes(PropertyVerdict const &v)
{
  return !v.Violation();
}

}  // namespace

class MatrixRowTest : public ::testing::TestWithParam<RowCase>
{};

TEST_P(MatrixRowTest, ReproducesPattern)
{
  auto const &c   = GetParam();
  auto const  ctx = SmallContext(std::string("table1/") + c.file);
  EXPECT_EQ(Passes(CheckOffChainInfluence(ctx)), c.off_chain);
  EXPECT_EQ(Passes(CheckUserSimplicity(ctx)), c.user);
  EXPECT_EQ(Passes(CheckMinerSimplicity(ctx)), c.miner);
}

INSTANTIATE_TEST_SUITE_P(Table, MatrixRowTest,
                         ::testing::Values(RowCase{"c2pa.cfg", true, true, true},
                                           RowCase{"eip1559.cfg", false, true, true},
                                           RowCase{"p2pa.cfg", true, true, false},
                                           RowCase{"bomb_pp.cfg", true, false, true},
                                           RowCase{"wpb_sigma_val.cfg", true, false, false},
                                           RowCase{"sr2pa_2pa.cfg", false, true, false},
                                           RowCase{"bomb_wpb.cfg", false, false, true},
                                           RowCase{"sr2pa_1pa.cfg", false, false, false}));

TEST(Checkers, NonTruthfulUsersAreATrivialViolation)
{
  auto const v = CheckUserSimplicity(SmallContext("table1/bomb_pp.cfg"));
  ASSERT_TRUE(v.Violation());
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_TRUE(v.witness->trivial);
}

TEST(Checkers, NonCompliantMinerIsATrivialViolation)
{
  auto const v = CheckMinerSimplicity(SmallContext("table1/sr2pa_1pa.cfg"));
  ASSERT_TRUE(v.Violation());
  EXPECT_TRUE(v.witness->trivial);
}

TEST(Checkers, P2paMinerDeviationGain)
{
  auto const ctx = SmallContext("table1/p2pa.cfg", 200000);
  auto const v   = CheckMinerSimplicity(ctx);
  ASSERT_TRUE(v.Violation());
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_FALSE(v.witness->trivial);
  EXPECT_TRUE(Within(v.witness->gain, oracle::kP2paMaxBidGain, v.witness->std_err, 4.0))
    << v.witness->description << " " << v.witness->gain;
}

TEST(Checkers, StrongCollusionOnSecondPrice)
{
  auto const v = CheckStrongCollusion(SmallContext("table1/c2pa.cfg", 100000));
  ASSERT_TRUE(v.Violation());
  EXPECT_GT(v.witness->gain, 3.0 * v.witness->std_err);
}

TEST(Checkers, StrongCollusionProofEip)
{
  auto const v = CheckStrongCollusion(SmallContext("table1/eip1559.cfg"));
  EXPECT_FALSE(v.Violation());
}

TEST(Checkers, OffChainPostedPriceWitnessOnEip)
{
  auto ctx   = SmallContext("eip1559_curve.cfg", 100000);
  auto const v = CheckOffChainInfluence(ctx);
  ASSERT_TRUE(v.Violation());
  // four users at base fee 0.3
  EXPECT_TRUE(Within(v.witness->gain, 4 * oracle::kEipPostedPerUser, v.witness->std_err, 4.0)) << v.witness->gain;
  EXPECT_EQ(v.witness->detail["attack"]["kind"], "off_chain_posted_price");
}

TEST(Checkers, OffChainSecondPriceBeatsSquaredRevenue)
{
  auto const v = CheckOffChainInfluence(SmallContext("table1/sr2pa_2pa.cfg", 100000));
  ASSERT_TRUE(v.Violation());
  EXPECT_TRUE(Within(v.witness->gain, oracle::kC2paRevenue - oracle::kSr2paRevenue, v.witness->std_err, 4.0))
    << v.witness->gain;
}

TEST(Checkers, DraPenaltyDial)
{
  EXPECT_TRUE(CheckMinerSimplicity(SmallContext("dra_p0.cfg")).Violation());
  EXPECT_FALSE(CheckMinerSimplicity(SmallContext("dra_p2.cfg")).Violation());
}

TEST(Checkers, ConstantRevenue)
{
  auto       cfg = LoadScenario(Scenario("eip1559_curve.cfg"));
  auto const ctx = SmallContext("eip1559_curve.cfg", 5000);
  ProfileFamily family = [&cfg](std::size_t n) { return cfg.MakeProfile(n); };
  EXPECT_FALSE(CheckConstantRevenue(ctx, family, cfg.n_list, {0.25, 0.75}).Violation());

  // second price revenue grows with n
  auto c2pa = LoadScenario(Scenario("table1/c2pa.cfg"));
  auto cctx = SmallContext("table1/c2pa.cfg", 5000);
  ProfileFamily cf = [&c2pa](std::size_t n) { return c2pa.MakeProfile(n); };
  cctx.game = c2pa.MakeGame(2);
  EXPECT_TRUE(CheckConstantRevenue(cctx, cf, {1, 2, 3}, {}).Violation());
}

TEST(Checkers, UnknownCheckerName)
{
  EXPECT_THROW(RunChecker("telepathy", SmallContext("table1/c2pa.cfg")), InvalidParameter);
}

TEST(Checkers, VerdictJsonCarriesBudgetAndSeed)
{
  auto const ctx = SmallContext("table1/bomb_pp.cfg");
  auto const j   = CheckUserSimplicity(ctx).ToJson();
  EXPECT_EQ(j["property"], "user_simplicity");
  EXPECT_EQ(j["verdict"], "VIOLATION");
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), ctx.seed);
  EXPECT_TRUE(j["budget"].contains("reps"));
  EXPECT_TRUE(j["witness"]["trivial"].get<bool>());
}

TEST(Checkers, MatrixNeedsEveryRow)
{
  std::vector<ScenarioVerdicts> partial{{"C2PA", {}}};
  EXPECT_THROW(BuildPropertyMatrix(partial), ScenarioGap);
}

TEST(Checkers, MatrixRenderLayout)
{
  std::vector<ScenarioVerdicts> rows;
  for (auto const &label : Table1Labels())
  {
    ScenarioVerdicts sv{label, {}};
    for (auto p : {kOffChainInfluence, kUserSimplicity, kMinerSimplicity})
    {
      PropertyVerdict v;
      v.property = std::string(p);
      v.verdict  = label == "C2PA" ? Verdict::kNoViolationFound : Verdict::kViolation;
      sv.verdicts.push_back(v);
    }
    rows.push_back(sv);
  }
  auto const text = BuildPropertyMatrix(rows).Render();
  auto const first = text.substr(0, text.find('\n'));
  EXPECT_EQ(first, "Mechanism   Off-chain IP    User simple     Miner simple");
  EXPECT_NE(text.find("C2PA        ✓               ✓               ✓\n"), std::string::npos);
  EXPECT_NE(text.find("SR2PA-1PA   ✗               ✗               ✗\n"), std::string::npos);
  EXPECT_EQ(Table1Labels().front(), "C2PA");
  EXPECT_EQ(Table1Labels().back(), "SR2PA-1PA");
}

TEST(Checkers, EquilibriumRanking)
{
  Game game{{}, ValueDistribution::Uniform(0.0, 1.0), 2};
  game.mech.kind = MechanismKind::kCk1pa;
  std::vector<EquilibriumEntry> eq{
    {"spa r=0", OnChainProfile::Symmetric(MinerStrategy::Compliant(0.0), UserStrategy::Truthful(), 2)},
    {"spa r=0.5", OnChainProfile::Symmetric(MinerStrategy::Compliant(0.5), UserStrategy::Truthful(), 2)}};
  auto const ranking = CompareOnChainEquilibria(game, eq, 50000, 3);
  ASSERT_EQ(ranking.size(), 2u);
  EXPECT_EQ(ranking[0].label, "spa r=0.5");
  EXPECT_TRUE(Within(ranking[1].revenue.mean, 1.0 / 3.0, ranking[1].revenue.std_err, 4.0));
}
