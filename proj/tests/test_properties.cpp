// Cross-checker invariants: witnesses replay, more search never loses a violation,
// and the implications between the collusion notions hold on concrete rows.

#include "test_util.hpp"

#include "tfmlab/checkers.hpp"
#include "tfmlab/config.hpp"

#include <gtest/gtest.h>

using namespace tfmlab;
using testutil::Scenario;

namespace {

CheckContext Context(std::string const &rel, std::uint64_t reps = 20000)
{
  auto cfg = LoadScenario(Scenario(rel));
  cfg.reps = reps;
  auto ctx = cfg.MakeContext(DeriveSeed(cfg.seed, ScenarioHash(cfg)));
  ctx.budget.collusion_screen_reps = 2000;
  return ctx;
}

std::vector<std::string> const kRows = {"c2pa.cfg",          "eip1559.cfg",   "p2pa.cfg",    "bomb_pp.cfg",
                                        "wpb_sigma_val.cfg", "sr2pa_2pa.cfg", "bomb_wpb.cfg", "sr2pa_1pa.cfg"};

}  // namespace

TEST(Properties, EveryWitnessReplaysWithAFreshSeed)
{
  for (auto const &row : kRows)
  {
    auto const ctx = Context("table1/" + row);
    for (auto name : {kOffChainInfluence, kUserSimplicity, kMinerSimplicity})
    {
      auto const v = RunChecker(name, ctx);
      if (!v.Violation())
      {
        EXPECT_FALSE(v.witness.has_value()) << row << " " << name;
        continue;
      }
      ASSERT_TRUE(v.witness.has_value()) << row << " " << name;
      if (v.witness->trivial)
      {
        continue;
      }
      ASSERT_TRUE(static_cast<bool>(v.witness->replay)) << row << " " << name;
      auto const g = v.witness->replay(DeriveSeed(ctx.seed, "replay"), 4 * ctx.budget.reps);
      EXPECT_GT(g.mean, 3.0 * g.std_err) << row << " " << name << ": " << v.witness->description;
    }
  }
}

TEST(Properties, LargerBudgetKeepsViolations)
{
  for (auto const &[row, name] : std::vector<std::pair<std::string, std::string_view>>{
         {"table1/p2pa.cfg", kMinerSimplicity},
         {"table1/sr2pa_2pa.cfg", kMinerSimplicity},
         {"table1/c2pa.cfg", kStrongCollusion},
         {"dra_p0.cfg", kMinerSimplicity}})
  {
    auto small                   = Context(row);
    small.budget.bid_points      = 51;
    small.budget.reserve_points  = 11;
    small.budget.value_points    = 11;
    small.budget.dra_grid_points = 25;
    auto large                   = Context(row);
    large.budget.bid_points      = 401;
    large.budget.reserve_points  = 81;
    large.budget.dra_grid_points = 200;
    auto const a = RunChecker(name, small);
    auto const b = RunChecker(name, large);
    ASSERT_TRUE(a.Violation()) << row << " " << name;
    EXPECT_TRUE(b.Violation()) << row << " " << name;
    // a superset search finds at least roughly the same gain
    EXPECT_GE(b.witness->gain, a.witness->gain - 5.0 * (a.witness->std_err + b.witness->std_err)) << row;
  }
}

TEST(Properties, SmallerBudgetNeverInventsViolations)
{
  for (auto const &[row, name] : std::vector<std::pair<std::string, std::string_view>>{
         {"table1/c2pa.cfg", kMinerSimplicity},
         {"table1/eip1559.cfg", kStrongCollusion},
         {"dra_p2.cfg", kMinerSimplicity}})
  {
    auto ctx                   = Context(row);
    ctx.budget.bid_points      = 21;
    ctx.budget.reserve_points  = 5;
    ctx.budget.dra_grid_points = 10;
    EXPECT_FALSE(RunChecker(name, ctx).Violation()) << row << " " << name;
  }
}

TEST(Properties, WeakCollusionImpliesStrongCollusion)
{
  for (auto const &row : {"table1/c2pa.cfg", "table1/eip1559.cfg"})
  {
    auto const ctx    = Context(row);
    auto const weak   = CheckWeakCollusion(ctx);
    auto const strong = CheckStrongCollusion(ctx);
    if (weak.Violation())
    {
      EXPECT_TRUE(strong.Violation()) << row;
    }
    if (!strong.Violation())
    {
      EXPECT_FALSE(weak.Violation()) << row;
    }
  }
}

TEST(Properties, OffChainProofImpliesTrustlessProof)
{
  auto const ctx = Context("table1/c2pa.cfg");
  ASSERT_FALSE(CheckOffChainInfluence(ctx).Violation());
  EXPECT_FALSE(CheckTrustlessCollusion(ctx).Violation());
}

TEST(Properties, SameSeedSameVerdict)
{
  auto const ctx = Context("table1/p2pa.cfg");
  auto const a   = CheckMinerSimplicity(ctx).ToJson();
  auto const b   = CheckMinerSimplicity(ctx).ToJson();
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Properties, ThresholdsOnlyEverRaiseTheBar)
{
  // a stricter z can flip a violation off but never on
  for (auto const &row : kRows)
  {
    auto loose          = Context("table1/" + row);
    auto strict         = loose;
    strict.thresholds.z = 50.0;
    for (auto name : {kOffChainInfluence, kMinerSimplicity})
    {
      if (RunChecker(name, strict).Violation())
      {
        EXPECT_TRUE(RunChecker(name, loose).Violation()) << row << " " << name;
      }
    }
  }
}
