#include "tfmlab/checkers.hpp"

#include "tfmlab/error.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace tfmlab {
namespace {

std::string Num(double x)
{
  return fmt::format("{:.6g}", x);
}

std::vector<double> LinearGrid(double lo, double hi, std::size_t points)
{
  std::vector<double> grid;
  if (points == 0)
  {
    return grid;
  }
  if (points == 1)
  {
    return {lo};
  }
  for (std::size_t i = 0; i < points; ++i)
  {
    grid.push_back(i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return grid;
}

std::vector<double> BidGrid(Game const &game, std::size_t points)
{
  return LinearGrid(0.0, game.dist.EffectiveHi(), points);
}

// values at the midpoints of equal-probability cells, for ex-ante averages
std::vector<double> QuantileMidpoints(ValueDistribution const &d, std::size_t cells)
{
  std::vector<double> grid;
  for (std::size_t j = 0; j < cells; ++j)
  {
    grid.push_back(d.Quantile((static_cast<double>(j) + 0.5) / static_cast<double>(cells)));
  }
  return grid;
}

std::size_t Cell(ValueDistribution const &d, double v, std::size_t cells)
{
  auto const c = static_cast<std::size_t>(d.Cdf(v) * static_cast<double>(cells));
  return std::min(c, cells - 1);
}

PropertyVerdict NewVerdict(std::string_view property, CheckContext const &ctx)
{
  PropertyVerdict v;
  v.property = std::string(property);
  v.seed     = ctx.seed;
  v.budget   = ctx.budget.ToJson();
  v.budget["thresholds"] = ctx.thresholds.ToJson();
  return v;
}

void RequireSingleBid(OnChainProfile const &profile)
{
  for (auto const &u : profile.users)
  {
    if (u.MultiBid())
    {
      throw InvalidParameter("deviation search requires single-bid user strategies");
    }
  }
}

void RequireCartelUser(CheckContext const &ctx)
{
  if (ctx.cartel_user >= ctx.game.n)
  {
    throw InvalidParameter(fmt::format("cartel user {} out of range for n={}", ctx.cartel_user, ctx.game.n));
  }
}

// indices sorted by decreasing mean, stable in the original order
std::vector<std::size_t> RankByMean(std::vector<Moments> const &m)
{
  std::vector<std::size_t> order(m.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m[a].mean > m[b].mean; });
  return order;
}

struct MinerDeviation
{
  std::string   family;
  MinerStrategy strategy;
};

// expected miner-utility gain of each deviation over the profile miner, on shared draws
std::vector<Moments> MinerGains(Game const &game, OnChainProfile const &bound, std::vector<MinerStrategy> const &miners,
                                std::uint64_t reps, std::uint64_t seed, std::string_view purpose)
{
  return RunReplications(reps, miners.size(), seed, purpose, [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(game.n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      ResolveUserBids(game, bound, *values, *ws);
      PlayResolvedBids(game, bound.miner, *values, *ws);
      double const base = ws->miner_utility;
      for (std::size_t d = 0; d < miners.size(); ++d)
      {
        PlayResolvedBids(game, miners[d], *values, *ws);
        out[d] = ws->miner_utility - base;
      }
    };
  });
}

struct JointCandidate
{
  std::size_t value_index;
  double      bid;
  std::size_t miner_index;
};

// joint miner + cartel-user utility gain of each candidate at its cartel value
std::vector<Moments> JointGains(Game const &game, OnChainProfile const &bound, std::size_t cartel,
                                std::vector<double> const &values_grid, std::vector<JointCandidate> const &cands,
                                std::vector<MinerStrategy> const &miners, std::uint64_t reps, std::uint64_t seed,
                                std::string_view purpose)
{
  // candidates grouped by value index so bids are resolved once per value
  std::vector<std::vector<std::size_t>> by_value(values_grid.size());
  for (std::size_t c = 0; c < cands.size(); ++c)
  {
    by_value[cands[c].value_index].push_back(c);
  }
  return RunReplications(reps, cands.size(), seed, purpose, [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(game.n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      for (std::size_t g = 0; g < values_grid.size(); ++g)
      {
        if (by_value[g].empty())
        {
          continue;
        }
        (*values)[cartel] = values_grid[g];
        ResolveUserBids(game, bound, *values, *ws);
        PlayResolvedBids(game, bound.miner, *values, *ws);
        double const base  = ws->miner_utility + ws->user_utility[cartel];
        double const saved = ws->user_bids[cartel].amount;
        for (std::size_t c : by_value[g])
        {
          ws->user_bids[cartel].amount = cands[c].bid;
          PlayResolvedBids(game, miners[cands[c].miner_index], *values, *ws);
          out[c] = ws->miner_utility + ws->user_utility[cartel] - base;
        }
        ws->user_bids[cartel].amount = saved;
      }
    };
  });
}

// ---------------------------------------------------------------------------
// Collusion contracts between the miner and one user

enum class ContractKind
{
  kEntryFee,     // user pays a fee, miner drops its reserve
  kRebate,       // user bids the reserve level, miner rebates reserve - report/2 on inclusion
  kShillRefund   // user bids φ⁻¹(report), miner refunds a share of the payment above the report
};

struct Contract
{
  ContractKind kind;
  double       param;

  std::string Describe() const
  {
    switch (kind)
    {
    case ContractKind::kEntryFee:
      return fmt::format("entry_fee(gamma={})", Num(param));
    case ContractKind::kRebate:
      return fmt::format("rebate_for_shill(level={})", Num(param));
    case ContractKind::kShillRefund:
      return fmt::format("inverse_virtual_shill(refund={})", Num(param));
    }
    return "?";
  }
};

// reserve-like level the rebate contract asks the user to bid
double RebateLevel(Game const &game, OnChainProfile const &profile)
{
  if (game.mech.TakesAdvice())
  {
    return profile.miner.CompliantAdvice();
  }
  if (game.mech.kind == MechanismKind::kEip1559)
  {
    return game.mech.price;
  }
  return game.mech.reserve;
}

std::vector<Contract> ContractLibrary(Game const &game, OnChainProfile const &profile)
{
  double const          top = game.dist.EffectiveHi();
  std::vector<Contract> lib;
  for (double share : {0.05, 0.1, 0.2})
  {
    lib.push_back({ContractKind::kEntryFee, share * top});
  }
  lib.push_back({ContractKind::kRebate, RebateLevel(game, profile)});
  for (double beta : {0.25, 0.5, 0.75, 1.0})
  {
    lib.push_back({ContractKind::kShillRefund, beta});
  }
  return lib;
}

struct ContractPlay
{
  double user;
  double miner;
};

class ContractEvaluator
{
public:
  ContractEvaluator(Game const &game, OnChainProfile const &bound, std::size_t cartel)
    : game_(game)
    , bound_(bound)
    , cartel_(cartel)
    , cheap_miner_(game.mech.TakesAdvice() ? MinerStrategy::Compliant(0.0) : bound.miner)
  {}

  // plays with ws.user_bids already resolved; action < 0 means the user rejects
  ContractPlay Play(Contract const &c, double action, std::span<double const> values, PlayWorkspace &ws) const
  {
    auto const i = cartel_;
    if (action < 0.0)
    {
      PlayResolvedBids(game_, bound_.miner, values, ws);
      return {ws.user_utility[i], ws.miner_utility};
    }
    double const saved = ws.user_bids[i].amount;
    ContractPlay out{};
    switch (c.kind)
    {
    case ContractKind::kEntryFee:
      ws.user_bids[i].amount = action;
      PlayResolvedBids(game_, cheap_miner_, values, ws);
      out = {ws.user_utility[i] - c.param, ws.miner_utility + c.param};
      break;
    case ContractKind::kRebate:
    {
      ws.user_bids[i].amount = c.param;
      PlayResolvedBids(game_, bound_.miner, values, ws);
      double const refund = ws.user_included[i] ? std::max(0.0, c.param - action / 2.0) : 0.0;
      out                 = {ws.user_utility[i] + refund, ws.miner_utility - refund};
      break;
    }
    case ContractKind::kShillRefund:
    {
      ws.user_bids[i].amount = ShillBid(action);
      PlayResolvedBids(game_, bound_.miner, values, ws);
      double const refund = ws.user_included[i] ? c.param * std::max(0.0, ws.user_payment[i] - action) : 0.0;
      out                 = {ws.user_utility[i] + refund, ws.miner_utility - refund};
      break;
    }
    }
    ws.user_bids[i].amount = saved;
    return out;
  }

private:
  double ShillBid(double report) const
  {
    try
    {
      return std::max(0.0, InverseVirtual(game_.dist, report));
    }
    catch (Error const &)
    {
      return report;
    }
  }

  Game const           &game_;
  OnChainProfile const &bound_;
  std::size_t           cartel_;
  MinerStrategy         cheap_miner_;
};

// Per value cell, the cartel user's best action (-1 = reject) against profile opponents.
std::vector<double> CartelBestResponse(Game const &game, OnChainProfile const &bound, std::size_t cartel,
                                       Contract const &c, std::vector<double> const &cells,
                                       std::vector<double> const &actions, std::uint64_t reps, std::uint64_t seed,
                                       std::string const &purpose)
{
  ContractEvaluator const eval(game, bound, cartel);
  std::size_t const       A = actions.size() + 1;
  auto moments = RunReplications(reps, cells.size() * A, seed, purpose, [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(game.n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      for (std::size_t j = 0; j < cells.size(); ++j)
      {
        (*values)[cartel] = cells[j];
        ResolveUserBids(game, bound, *values, *ws);
        for (std::size_t a = 0; a < A; ++a)
        {
          double const action = a == 0 ? -1.0 : actions[a - 1];
          out[j * A + a]      = eval.Play(c, action, *values, *ws).user;
        }
      }
    };
  });
  std::vector<double> policy(cells.size(), -1.0);
  for (std::size_t j = 0; j < cells.size(); ++j)
  {
    double best = moments[j * A].mean;
    for (std::size_t a = 1; a < A; ++a)
    {
      if (moments[j * A + a].mean > best)
      {
        best      = moments[j * A + a].mean;
        policy[j] = actions[a - 1];
      }
    }
  }
  return policy;
}

struct ContractGains
{
  Moments user;
  Moments miner;
};

// Ex-ante gains of the cartel user and the miner when the cartel user follows `policy`
// and the other users bid `others` per value cell (empty = profile strategies).
ContractGains EvaluateContract(Game const &game, OnChainProfile const &bound, std::size_t cartel, Contract const &c,
                               std::vector<double> const &policy, std::vector<double> const &others,
                               std::uint64_t reps, std::uint64_t seed, std::string const &purpose)
{
  ContractEvaluator const eval(game, bound, cartel);
  std::size_t const       cells = policy.size();
  auto moments = RunReplications(reps, 2, seed, purpose, [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(game.n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      ResolveUserBids(game, bound, *values, *ws);
      PlayResolvedBids(game, bound.miner, *values, *ws);
      double const base_user  = ws->user_utility[cartel];
      double const base_miner = ws->miner_utility;
      if (!others.empty())
      {
        for (std::size_t k = 0; k < game.n; ++k)
        {
          if (k != cartel)
          {
            ws->user_bids[k].amount = others[Cell(game.dist, (*values)[k], others.size())];
          }
        }
      }
      double const action = policy[Cell(game.dist, (*values)[cartel], cells)];
      auto const   play   = eval.Play(c, action, *values, *ws);
      out[0]              = play.user - base_user;
      out[1]              = play.miner - base_miner;
    };
  });
  return {moments[0], moments[1]};
}

// Symmetric best response of the non-cartel users, per value cell, over a bid grid.
std::vector<double> OthersBestResponse(Game const &game, OnChainProfile const &bound, std::size_t cartel,
                                       Contract const &c, std::vector<double> const &policy,
                                       std::vector<double> const &cells, std::vector<double> const &bids,
                                       std::uint64_t reps, std::uint64_t seed, std::string const &purpose)
{
  std::size_t const       rep = cartel == 0 ? 1 : 0;
  ContractEvaluator const eval(game, bound, cartel);
  std::size_t const       B = bids.size();
  auto moments = RunReplications(reps, cells.size() * B, seed, purpose, [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(game.n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      double const action = policy[Cell(game.dist, (*values)[cartel], policy.size())];
      for (std::size_t j = 0; j < cells.size(); ++j)
      {
        (*values)[rep] = cells[j];
        ResolveUserBids(game, bound, *values, *ws);
        for (std::size_t b = 0; b < B; ++b)
        {
          ws->user_bids[rep].amount = bids[b];
          eval.Play(c, action, *values, *ws);
          out[j * B + b] = ws->user_utility[rep];
        }
      }
    };
  });
  std::vector<double> response(cells.size(), 0.0);
  for (std::size_t j = 0; j < cells.size(); ++j)
  {
    std::size_t best = 0;
    for (std::size_t b = 1; b < B; ++b)
    {
      if (moments[j * B + b].mean > moments[j * B + best].mean)
      {
        best = b;
      }
    }
    response[j] = bids[best];
  }
  return response;
}

std::vector<double> ContractActions(Game const &game, Contract const &c, std::size_t points)
{
  // bids for the entry fee, value reports otherwise
  if (c.kind == ContractKind::kEntryFee)
  {
    return BidGrid(game, points);
  }
  return LinearGrid(game.dist.lo(), game.dist.EffectiveHi(), points);
}

}  // namespace

// ---------------------------------------------------------------------------

nlohmann::json Thresholds::ToJson() const
{
  return {{"z", z}, {"abs_eps", abs_eps}, {"revenue_abs_eps", revenue_abs_eps}, {"user_abs_eps", user_abs_eps}};
}

nlohmann::json SearchBudget::ToJson() const
{
  return {{"value_points", value_points},
          {"bid_points", bid_points},
          {"reserve_points", reserve_points},
          {"fabricate_max", fabricate_max},
          {"fabricate_points", fabricate_points},
          {"opp_samples", opp_samples},
          {"dra_grid_points", dra_grid_points},
          {"contract_points", contract_points},
          {"confirm_top", confirm_top},
          {"reps", reps},
          {"screen_reps", screen_reps},
          {"collusion_screen_reps", collusion_screen_reps}};
}

std::string_view VerdictName(Verdict v)
{
  return v == Verdict::kViolation ? "VIOLATION" : "NO_VIOLATION_FOUND";
}

nlohmann::json PropertyVerdict::ToJson() const
{
  nlohmann::json j;
  j["scenario"] = scenario;
  j["property"] = property;
  j["verdict"]  = VerdictName(verdict);
  if (witness)
  {
    j["witness"] = {{"description", witness->description},
                    {"gain", witness->gain},
                    {"stderr", witness->std_err},
                    {"trivial", witness->trivial},
                    {"detail", witness->detail}};
  }
  else
  {
    j["witness"] = nullptr;
  }
  j["budget"]  = budget;
  j["seed"]    = seed;
  j["notes"]   = notes;
  j["details"] = details.is_null() ? nlohmann::json::object() : details;
  return j;
}

std::vector<std::string_view> const &CheckerNames()
{
  static std::vector<std::string_view> const names = {kOffChainInfluence, kUserSimplicity,     kMinerSimplicity,
                                                      kStrongCollusion,   kWeakCollusion,      kTrustlessCollusion,
                                                      kConstantRevenue};
  return names;
}

// ---------------------------------------------------------------------------

PropertyVerdict CheckUserSimplicity(CheckContext const &ctx)
{
  auto verdict = NewVerdict(kUserSimplicity, ctx);
  if (!ctx.profile.UsersTruthful())
  {
    std::vector<std::string> names;
    for (auto const &u : ctx.profile.users)
    {
      names.push_back(u.Name());
    }
    verdict.verdict = Verdict::kViolation;
    verdict.witness = Witness{fmt::format("non-truthful user profile [{}]", fmt::join(names, ", ")), 0.0, 0.0, true,
                              nlohmann::json::object(), {}};
    return verdict;
  }
  RequireCartelUser(ctx);
  RequireSingleBid(ctx.profile);

  auto const &game   = ctx.game;
  auto const  i      = ctx.cartel_user;
  auto const  bound  = ctx.profile.Bound(game);
  auto const  vgrid  = SupportGrid(game.dist, ctx.budget.value_points);
  auto const  bgrid  = BidGrid(game, ctx.budget.bid_points);
  double const eps   = ctx.thresholds.user_abs_eps;

  PlayWorkspace       ws;
  std::vector<double> values(game.n);
  double              best_gain = 0.0;
  bool                found     = false;
  std::vector<double> best_values;
  double              best_v = 0.0, best_b = 0.0;
  bool                ir_failure = false;

  auto const purpose = HashLabel("user_simplicity");
  for (std::size_t s = 0; s < ctx.budget.opp_samples; ++s)
  {
    RngStream stream(ctx.seed, purpose, s);
    DrawValues(game.dist, stream, values);
    for (double v : vgrid)
    {
      values[i] = v;
      ResolveUserBids(game, bound, values, ws);
      PlayResolvedBids(game, bound.miner, values, ws);
      double const truthful = ws.user_utility[i];
      if (truthful < -eps && (!found || -truthful > best_gain))
      {
        found       = true;
        ir_failure  = true;
        best_gain   = -truthful;
        best_values = values;
        best_v      = v;
        best_b      = 0.0;
      }
      for (double b : bgrid)
      {
        ws.user_bids[i].amount = b;
        PlayResolvedBids(game, bound.miner, values, ws);
        double const gain = ws.user_utility[i] - truthful;
        if (gain > eps && (!found || gain > best_gain))
        {
          found       = true;
          ir_failure  = false;
          best_gain   = gain;
          best_values = values;
          best_v      = v;
          best_b      = b;
        }
      }
    }
  }
  verdict.details = {{"evaluations", ctx.budget.opp_samples * vgrid.size() * bgrid.size()}};
  if (!found)
  {
    return verdict;
  }

  std::vector<double> opponents;
  for (std::size_t k = 0; k < best_values.size(); ++k)
  {
    if (k != i)
    {
      opponents.push_back(best_values[k]);
    }
  }
  verdict.verdict = Verdict::kViolation;
  Witness w;
  w.gain    = best_gain;
  w.std_err = 0.0;
  if (ir_failure)
  {
    w.description = fmt::format("truthful bid {} loses {} against opponent bids {}", Num(best_v), Num(best_gain),
                                opponents);
  }
  else
  {
    w.description =
      fmt::format("value {} bids {} against opponent bids {}: utility +{}", Num(best_v), Num(best_b), opponents,
                  Num(best_gain));
  }
  w.detail = {{"value", best_v}, {"bid", best_b}, {"opponent_values", opponents}, {"individual_rationality", ir_failure}};
  w.replay = [game, bound, i, best_values, best_b, ir_failure](std::uint64_t, std::uint64_t) -> Gain {
    PlayWorkspace ws;
    ResolveUserBids(game, bound, best_values, ws);
    PlayResolvedBids(game, bound.miner, best_values, ws);
    double const truthful = ws.user_utility[i];
    if (ir_failure)
    {
      return {-truthful, 0.0};
    }
    ws.user_bids[i].amount = best_b;
    PlayResolvedBids(game, bound.miner, best_values, ws);
    return {ws.user_utility[i] - truthful, 0.0};
  };
  verdict.witness = std::move(w);
  return verdict;
}

// ---------------------------------------------------------------------------

PropertyVerdict CheckMinerSimplicity(CheckContext const &ctx)
{
  auto verdict = NewVerdict(kMinerSimplicity, ctx);
  auto const &game = ctx.game;
  if (!ctx.profile.miner.IsCompliant())
  {
    verdict.verdict = Verdict::kViolation;
    verdict.witness = Witness{fmt::format("non-compliant miner strategy {}", ctx.profile.miner.Describe()), 0.0, 0.0,
                              true, nlohmann::json::object(), {}};
    return verdict;
  }
  RequireSingleBid(ctx.profile);
  auto const   bound  = ctx.profile.Bound(game);
  double const advice = ctx.profile.miner.CompliantAdvice();
  auto const   with_base = [&](MinerStrategy s) {
    return MinerStrategy::Composite({MinerStrategy::Compliant(advice), std::move(s)});
  };

  std::vector<MinerDeviation> screened;
  std::vector<MinerDeviation> specific;
  if (game.mech.TakesAdvice())
  {
    for (double a : SupportGrid(game.dist, ctx.budget.reserve_points))
    {
      screened.push_back({"reserve", MinerStrategy::Compliant(a)});
    }
  }
  for (std::size_t j = 1; j <= game.n; ++j)
  {
    screened.push_back({"censor", with_base(MinerStrategy::CensorLowest(j))});
  }
  auto const fab_grid = SupportGrid(game.dist, ctx.budget.fabricate_points);
  std::vector<std::size_t> pick;
  std::function<void(std::size_t, std::size_t)> combos = [&](std::size_t start, std::size_t left) {
    if (left == 0)
    {
      std::vector<double> bids;
      for (auto idx : pick)
      {
        bids.push_back(fab_grid[idx]);
      }
      screened.push_back({"fabricate", with_base(MinerStrategy::Fabricate(std::move(bids)))});
      return;
    }
    for (std::size_t q = start; q < fab_grid.size(); ++q)
    {
      pick.push_back(q);
      combos(q + 1, left - 1);
      pick.pop_back();
    }
  };
  for (std::size_t m = 1; m <= ctx.budget.fabricate_max; ++m)
  {
    combos(0, m);
  }

  if (game.mech.TakesAdvice())
  {
    for (auto &s : {MinerStrategy::ReserveAtMaxBid(), MinerStrategy::P2paRevenueReserve(game.mech.k)})
    {
      if (game.AmountsVisible())
      {
        specific.push_back({"specific", with_base(s)});
      }
      else
      {
        verdict.notes.push_back(fmt::format("{} skipped: reads bid amounts, not observable under {}", s.Describe(),
                                            CryptoName(game.mech.crypto)));
      }
    }
  }
  if (game.mech.kind == MechanismKind::kDra)
  {
    specific.push_back(
      {"specific", with_base(MinerStrategy::DraSelectiveReveal(SupportGrid(game.dist, ctx.budget.dra_grid_points)))});
  }

  std::vector<MinerStrategy> screen_miners;
  for (auto const &d : screened)
  {
    screen_miners.push_back(d.strategy);
  }
  auto const screen = MinerGains(game, bound, screen_miners, ctx.budget.screen_reps, ctx.seed, "miner_simplicity/screen");

  std::vector<MinerDeviation> confirm;
  auto const                  order = RankByMean(screen);
  for (std::size_t r = 0; r < order.size() && r < ctx.budget.confirm_top; ++r)
  {
    confirm.push_back(screened[order[r]]);
  }
  for (auto const &d : specific)
  {
    confirm.push_back(d);
  }
  std::vector<MinerStrategy> confirm_miners;
  for (auto const &d : confirm)
  {
    confirm_miners.push_back(d.strategy);
  }
  auto const gains = MinerGains(game, bound, confirm_miners, ctx.budget.reps, ctx.seed, "miner_simplicity/confirm");

  nlohmann::json confirmed = nlohmann::json::array();
  std::size_t    best      = confirm.size();
  for (std::size_t c = 0; c < confirm.size(); ++c)
  {
    bool const violates = gains[c].mean > ctx.thresholds.Margin(gains[c].StdErr());
    confirmed.push_back({{"family", confirm[c].family},
                         {"deviation", confirm[c].strategy.Describe()},
                         {"gain", gains[c].mean},
                         {"stderr", gains[c].StdErr()},
                         {"violation", violates}});
    if (violates && (best == confirm.size() || gains[c].mean > gains[best].mean))
    {
      best = c;
    }
  }
  verdict.details = {{"screened", screened.size()}, {"confirmed", confirmed}};
  if (best == confirm.size())
  {
    return verdict;
  }
  verdict.verdict = Verdict::kViolation;
  Witness w;
  w.description = fmt::format("miner deviation {} gains {} per block", confirm[best].strategy.Describe(),
                              Num(gains[best].mean));
  w.gain        = gains[best].mean;
  w.std_err     = gains[best].StdErr();
  w.detail      = {{"family", confirm[best].family}, {"deviation", confirm[best].strategy.ToJson()}};
  w.replay      = [game, bound, s = confirm[best].strategy](std::uint64_t seed, std::uint64_t reps) -> Gain {
    auto const m = MinerGains(game, bound, {s}, reps, seed, "replay/miner")[0];
    return {m.mean, m.StdErr()};
  };
  verdict.witness = std::move(w);
  return verdict;
}

// ---------------------------------------------------------------------------

PropertyVerdict CheckStrongCollusion(CheckContext const &ctx)
{
  auto verdict = NewVerdict(kStrongCollusion, ctx);
  RequireCartelUser(ctx);
  RequireSingleBid(ctx.profile);
  auto const &game  = ctx.game;
  auto const  i     = ctx.cartel_user;
  auto const  bound = ctx.profile.Bound(game);
  auto const  vgrid = SupportGrid(game.dist, ctx.budget.value_points);
  auto const  bgrid = BidGrid(game, ctx.budget.bid_points);
  auto const  bctx  = game.Context();

  std::vector<MinerStrategy> miners = {bound.miner};
  bool const                 advice = game.mech.TakesAdvice();
  if (advice)
  {
    miners.push_back(MinerStrategy::Compliant(0.0));
  }
  std::size_t const reserve_base = miners.size();
  auto const        rgrid        = advice ? SupportGrid(game.dist, ctx.budget.reserve_points) : std::vector<double>{};
  for (double a : rgrid)
  {
    miners.push_back(MinerStrategy::Compliant(a));
  }

  std::vector<JointCandidate> cands;
  for (std::size_t g = 0; g < vgrid.size(); ++g)
  {
    double const v = vgrid[g];
    for (double b : bgrid)
    {
      cands.push_back({g, b, 0});
      if (advice)
      {
        cands.push_back({g, b, 1});
      }
    }
    double const own = bound.users[i].Bid(v, bctx);
    for (double b : {own, v})
    {
      for (std::size_t r = 0; r < rgrid.size(); ++r)
      {
        cands.push_back({g, b, reserve_base + r});
      }
      if (own == v)
      {
        break;
      }
    }
    try
    {
      cands.push_back({g, std::max(0.0, InverseVirtual(game.dist, v)), 0});
    }
    catch (Error const &)
    {
      // v outside the range of φ
    }
  }

  auto const screen = JointGains(game, bound, i, vgrid, cands, miners, ctx.budget.collusion_screen_reps, ctx.seed,
                                 "strong_collusion/screen");
  auto const order  = RankByMean(screen);
  std::vector<JointCandidate> top;
  for (std::size_t r = 0; r < order.size() && r < ctx.budget.confirm_top; ++r)
  {
    top.push_back(cands[order[r]]);
  }
  auto const gains = JointGains(game, bound, i, vgrid, top, miners, ctx.budget.reps, ctx.seed, "strong_collusion/confirm");

  nlohmann::json confirmed = nlohmann::json::array();
  std::size_t    best      = top.size();
  for (std::size_t c = 0; c < top.size(); ++c)
  {
    bool const violates = gains[c].mean > ctx.thresholds.Margin(gains[c].StdErr());
    confirmed.push_back({{"value", vgrid[top[c].value_index]},
                         {"bid", top[c].bid},
                         {"miner", miners[top[c].miner_index].Describe()},
                         {"gain", gains[c].mean},
                         {"stderr", gains[c].StdErr()},
                         {"violation", violates}});
    if (violates && (best == top.size() || gains[c].mean > gains[best].mean))
    {
      best = c;
    }
  }
  verdict.details = {{"candidates", cands.size()}, {"confirmed", confirmed}};
  if (best == top.size())
  {
    return verdict;
  }
  auto const   cand = top[best];
  double const v    = vgrid[cand.value_index];
  verdict.verdict   = Verdict::kViolation;
  Witness w;
  w.description = fmt::format("cartel user with value {} bids {} while the miner plays {}: joint utility +{}", Num(v),
                              Num(cand.bid), miners[cand.miner_index].Describe(), Num(gains[best].mean));
  w.gain        = gains[best].mean;
  w.std_err     = gains[best].StdErr();
  w.detail      = {{"value", v}, {"bid", cand.bid}, {"miner", miners[cand.miner_index].ToJson()}};
  w.replay      = [game, bound, i, v, cand, m = miners[cand.miner_index]](std::uint64_t seed, std::uint64_t reps) {
    auto const g = JointGains(game, bound, i, {v}, {{0, cand.bid, 0}}, {m}, reps, seed, "replay/strong")[0];
    return Gain{g.mean, g.StdErr()};
  };
  verdict.witness = std::move(w);
  return verdict;
}

// ---------------------------------------------------------------------------

PropertyVerdict CheckOffChainInfluence(CheckContext const &ctx)
{
  auto        verdict = NewVerdict(kOffChainInfluence, ctx);
  auto const &game    = ctx.game;
  auto const  burn    = game.mech.BurnPerInclusion();
  if (!burn)
  {
    throw BenchmarkUnavailable(fmt::format("no burn-per-inclusion benchmark for {}", KindName(game.mech.kind)));
  }
  std::size_t const cap     = game.mech.Capacity();
  auto const        bound   = ctx.profile.Bound(game);
  auto const        attacks = KnownOffChainAttacks(game);
  std::size_t const A       = attacks.size();

  auto const moments = RunReplications(ctx.budget.reps, 3 + A, ctx.seed, "off_chain_influence", [&]() -> ReplicationBody {
    auto ows     = std::make_shared<OffChainWorkspace>();
    auto values  = std::make_shared<std::vector<double>>(game.n);
    auto scratch = std::make_shared<std::vector<double>>();
    return [&, ows, values, scratch](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      PlayOnChain(game, bound, *values, ows->play);
      double const revenue = ows->play.miner_utility;
      double const bench   = BenchmarkSample(game.dist, *values, cap, *burn, *scratch);
      out[0]               = revenue;
      out[1]               = bench;
      out[2]               = bench - revenue;
      for (std::size_t a = 0; a < A; ++a)
      {
        PlayOffChain(game, bound, attacks[a], *values, *ows);
        out[3 + a] = ows->play.miner_utility - revenue;
      }
    };
  });

  nlohmann::json attack_json = nlohmann::json::array();
  std::size_t    best        = A;
  for (std::size_t a = 0; a < A; ++a)
  {
    auto const &m        = moments[3 + a];
    bool const  violates = m.mean > ctx.thresholds.RevenueMargin(m.StdErr());
    attack_json.push_back({{"attack", attacks[a].Describe()},
                           {"gain", m.mean},
                           {"stderr", m.StdErr()},
                           {"violation", violates}});
    // later attacks must beat earlier ones by more than rounding to become the witness
    if (violates && (best == A || m.mean > moments[3 + best].mean + 1e-12))
    {
      best = a;
    }
  }
  auto const &gap          = moments[2];
  bool const  gap_violates = gap.mean > ctx.thresholds.RevenueMargin(gap.StdErr());
  verdict.details = {{"revenue", SimEstimate::From(moments[0], ctx.seed).ToJson()},
                     {"benchmark", SimEstimate::From(moments[1], ctx.seed).ToJson()},
                     {"benchmark_gap", {{"gain", gap.mean}, {"stderr", gap.StdErr()}, {"violation", gap_violates}}},
                     {"capacity", cap == kUnlimited ? nlohmann::json("unlimited") : nlohmann::json(cap)},
                     {"burn", *burn},
                     {"attacks", attack_json}};
  verdict.notes.push_back("attacks are evaluated under their documented user best responses only");

  if (best < A)
  {
    verdict.verdict = Verdict::kViolation;
    auto const &m   = moments[3 + best];
    Witness     w;
    w.description = fmt::format("off-chain mechanism {} raises miner revenue by {}", attacks[best].Describe(),
                                Num(m.mean));
    w.gain        = m.mean;
    w.std_err     = m.StdErr();
    w.detail      = {{"attack", attacks[best].ToJson()}, {"revenue", moments[0].mean}};
    w.replay      = [game, bound, off = attacks[best]](std::uint64_t seed, std::uint64_t reps) {
      auto const g = RunReplications(reps, 1, seed, "replay/off_chain", [&]() -> ReplicationBody {
        auto ows    = std::make_shared<OffChainWorkspace>();
        auto values = std::make_shared<std::vector<double>>(game.n);
        return [&, ows, values](RngStream &stream, std::span<double> out) {
          DrawValues(game.dist, stream, *values);
          PlayOnChain(game, bound, *values, ows->play);
          double const revenue = ows->play.miner_utility;
          PlayOffChain(game, bound, off, *values, *ows);
          out[0] = ows->play.miner_utility - revenue;
        };
      })[0];
      return Gain{g.mean, g.StdErr()};
    };
    verdict.witness = std::move(w);
  }
  else if (gap_violates)
  {
    verdict.verdict = Verdict::kViolation;
    Witness w;
    w.description = fmt::format("revenue {} falls short of the optimal benchmark {} by {}", Num(moments[0].mean),
                                Num(moments[1].mean), Num(gap.mean));
    w.gain        = gap.mean;
    w.std_err     = gap.StdErr();
    w.detail      = {{"benchmark", moments[1].mean}, {"revenue", moments[0].mean}};
    w.replay      = [game, bound, cap, b = *burn](std::uint64_t seed, std::uint64_t reps) {
      auto const g = RunReplications(reps, 1, seed, "replay/benchmark", [&]() -> ReplicationBody {
        auto ws      = std::make_shared<PlayWorkspace>();
        auto values  = std::make_shared<std::vector<double>>(game.n);
        auto scratch = std::make_shared<std::vector<double>>();
        return [&, ws, values, scratch](RngStream &stream, std::span<double> out) {
          DrawValues(game.dist, stream, *values);
          PlayOnChain(game, bound, *values, *ws);
          out[0] = BenchmarkSample(game.dist, *values, cap, b, *scratch) - ws->miner_utility;
        };
      })[0];
      return Gain{g.mean, g.StdErr()};
    };
    verdict.witness = std::move(w);
  }
  return verdict;
}

// ---------------------------------------------------------------------------

PropertyVerdict CheckWeakCollusion(CheckContext const &ctx)
{
  auto verdict = NewVerdict(kWeakCollusion, ctx);
  RequireCartelUser(ctx);
  RequireSingleBid(ctx.profile);
  auto const &game  = ctx.game;
  auto const  i     = ctx.cartel_user;
  auto const  bound = ctx.profile.Bound(game);
  auto const  cells = QuantileMidpoints(game.dist, ctx.budget.value_points);

  nlohmann::json per_contract = nlohmann::json::array();
  std::optional<std::pair<Contract, ContractGains>> best;
  std::vector<double>                               best_policy;
  for (auto const &c : ContractLibrary(game, ctx.profile))
  {
    auto const actions = ContractActions(game, c, ctx.budget.contract_points);
    auto const policy  = CartelBestResponse(game, bound, i, c, cells, actions, ctx.budget.collusion_screen_reps,
                                            ctx.seed, "weak_collusion/respond/" + c.Describe());
    auto const gains   = EvaluateContract(game, bound, i, c, policy, {}, ctx.budget.reps, ctx.seed,
                                          "weak_collusion/confirm/" + c.Describe());
    bool const user_gains  = gains.user.mean > ctx.thresholds.Margin(gains.user.StdErr());
    bool const miner_gains = gains.miner.mean > ctx.thresholds.Margin(gains.miner.StdErr());
    per_contract.push_back({{"contract", c.Describe()},
                            {"user_gain", gains.user.mean},
                            {"user_stderr", gains.user.StdErr()},
                            {"miner_gain", gains.miner.mean},
                            {"miner_stderr", gains.miner.StdErr()},
                            {"violation", user_gains && miner_gains}});
    if (user_gains && miner_gains && (!best || gains.miner.mean > best->second.miner.mean))
    {
      best        = std::make_pair(c, gains);
      best_policy = policy;
    }
  }
  verdict.details = {{"contracts", per_contract}};
  verdict.notes.push_back("cartel user plays a one-shot grid best response; other users keep the profile strategies");
  if (!best)
  {
    return verdict;
  }
  auto const [c, gains] = *best;
  verdict.verdict       = Verdict::kViolation;
  Witness w;
  w.description = fmt::format("contract {}: miner +{}, cartel user +{}", c.Describe(), Num(gains.miner.mean),
                              Num(gains.user.mean));
  w.gain        = std::min(gains.miner.mean, gains.user.mean);
  w.std_err     = gains.miner.mean < gains.user.mean ? gains.miner.StdErr() : gains.user.StdErr();
  w.detail      = {{"contract", c.Describe()}, {"policy", best_policy}};
  w.replay      = [game, bound, i, c = c, policy = best_policy](std::uint64_t seed, std::uint64_t reps) {
    auto const g = EvaluateContract(game, bound, i, c, policy, {}, reps, seed, "replay/weak");
    return g.miner.mean < g.user.mean ? Gain{g.miner.mean, g.miner.StdErr()} : Gain{g.user.mean, g.user.StdErr()};
  };
  verdict.witness = std::move(w);
  return verdict;
}

PropertyVerdict CheckTrustlessCollusion(CheckContext const &ctx)
{
  auto       verdict = NewVerdict(kTrustlessCollusion, ctx);
  auto const ocip    = CheckOffChainInfluence(ctx);
  if (!ocip.Violation())
  {
    verdict.notes.push_back("implied by the off-chain influence verdict (NO_VIOLATION_FOUND)");
    verdict.details = {{"path", "corollary"}};
    return verdict;
  }
  RequireCartelUser(ctx);
  RequireSingleBid(ctx.profile);
  auto const &game  = ctx.game;
  auto const  i     = ctx.cartel_user;
  auto const  bound = ctx.profile.Bound(game);
  auto const  cells = QuantileMidpoints(game.dist, ctx.budget.value_points);
  auto const  bids  = BidGrid(game, ctx.budget.contract_points);

  nlohmann::json per_contract = nlohmann::json::array();
  std::optional<std::pair<Contract, ContractGains>> best;
  std::vector<double>                               best_policy, best_others;
  for (auto const &c : ContractLibrary(game, ctx.profile))
  {
    auto const actions = ContractActions(game, c, ctx.budget.contract_points);
    auto const policy  = CartelBestResponse(game, bound, i, c, cells, actions, ctx.budget.collusion_screen_reps,
                                            ctx.seed, "trustless_collusion/respond/" + c.Describe());
    std::vector<double> others;
    if (game.n >= 2)
    {
      others = OthersBestResponse(game, bound, i, c, policy, cells, bids, ctx.budget.collusion_screen_reps, ctx.seed,
                                  "trustless_collusion/others/" + c.Describe());
    }
    auto const gains = EvaluateContract(game, bound, i, c, policy, others, ctx.budget.reps, ctx.seed,
                                        "trustless_collusion/confirm/" + c.Describe());
    bool const user_gains  = gains.user.mean > ctx.thresholds.Margin(gains.user.StdErr());
    bool const miner_gains = gains.miner.mean > ctx.thresholds.Margin(gains.miner.StdErr());
    per_contract.push_back({{"contract", c.Describe()},
                            {"user_gain", gains.user.mean},
                            {"user_stderr", gains.user.StdErr()},
                            {"miner_gain", gains.miner.mean},
                            {"miner_stderr", gains.miner.StdErr()},
                            {"violation", user_gains && miner_gains}});
    if (user_gains && miner_gains && (!best || gains.miner.mean > best->second.miner.mean))
    {
      best        = std::make_pair(c, gains);
      best_policy = policy;
      best_others = others;
    }
  }
  verdict.details = {{"path", "direct"}, {"contracts", per_contract}};
  verdict.notes.push_back("other users re-optimise once on a bid grid against the announced contract");
  if (!best)
  {
    return verdict;
  }
  auto const [c, gains] = *best;
  verdict.verdict       = Verdict::kViolation;
  Witness w;
  w.description = fmt::format("contract {} with re-optimised outsiders: miner +{}, cartel user +{}", c.Describe(),
                              Num(gains.miner.mean), Num(gains.user.mean));
  w.gain        = std::min(gains.miner.mean, gains.user.mean);
  w.std_err     = gains.miner.mean < gains.user.mean ? gains.miner.StdErr() : gains.user.StdErr();
  w.detail      = {{"contract", c.Describe()}, {"policy", best_policy}, {"others", best_others}};
  w.replay      = [game, bound, i, c = c, policy = best_policy, others = best_others](std::uint64_t seed,
                                                                                   std::uint64_t reps) {
    auto const g = EvaluateContract(game, bound, i, c, policy, others, reps, seed, "replay/trustless");
    return g.miner.mean < g.user.mean ? Gain{g.miner.mean, g.miner.StdErr()} : Gain{g.user.mean, g.user.StdErr()};
  };
  verdict.witness = std::move(w);
  return verdict;
}

// ---------------------------------------------------------------------------

PropertyVerdict CheckConstantRevenue(CheckContext const &ctx, ProfileFamily const &family,
                                     std::vector<std::size_t> const &n_range, std::vector<double> const &conditioning)
{
  auto              verdict = NewVerdict(kConstantRevenue, ctx);
  std::size_t const C       = conditioning.size();

  struct Row
  {
    std::size_t          n;
    std::vector<Moments> m;  // [0] unconditional, [1 + c] user 0 fixed at conditioning[c]
  };
  std::vector<Row> rows;
  for (std::size_t n : n_range)
  {
    Game game  = ctx.game;
    game.n     = n;
    auto bound = family(n).Bound(game);
    auto m     = RunReplications(ctx.budget.reps, 1 + C, ctx.seed, "constant_revenue", [&]() -> ReplicationBody {
      auto ws     = std::make_shared<PlayWorkspace>();
      auto values = std::make_shared<std::vector<double>>(n);
      return [&, ws, values](RngStream &stream, std::span<double> out) {
        DrawValues(game.dist, stream, *values);
        PlayOnChain(game, bound, *values, *ws);
        out[0] = ws->outcome.miner_revenue;
        if (n == 0)
        {
          return;
        }
        for (std::size_t c = 0; c < C; ++c)
        {
          (*values)[0] = conditioning[c];
          PlayOnChain(game, bound, *values, *ws);
          out[1 + c] = ws->outcome.miner_revenue;
        }
      };
    });
    rows.push_back({n, std::move(m)});
  }

  nlohmann::json curve = nlohmann::json::array();
  for (auto const &r : rows)
  {
    curve.push_back({{"n", r.n}, {"mean", r.m[0].mean}, {"stderr", r.m[0].StdErr()}});
  }
  verdict.details = {{"curve", curve}, {"conditioning", conditioning}};

  double         best_excess = 0.0;
  nlohmann::json best;
  for (std::size_t a = 0; a < rows.size(); ++a)
  {
    for (std::size_t b = a + 1; b < rows.size(); ++b)
    {
      for (std::size_t col = 0; col <= C; ++col)
      {
        if (col > 0 && (rows[a].n == 0 || rows[b].n == 0))
        {
          continue;
        }
        double const diff   = rows[b].m[col].mean - rows[a].m[col].mean;
        double const se     = std::hypot(rows[a].m[col].StdErr(), rows[b].m[col].StdErr());
        double const excess = std::abs(diff) - ctx.thresholds.RevenueMargin(se);
        if (excess > 0.0 && (best.is_null() || excess > best_excess))
        {
          best_excess = excess;
          best        = {{"n_a", rows[a].n}, {"n_b", rows[b].n}, {"diff", diff}, {"stderr", se}};
          if (col > 0)
          {
            best["conditioned_value"] = conditioning[col - 1];
          }
        }
      }
    }
  }
  if (best.is_null())
  {
    return verdict;
  }
  verdict.verdict = Verdict::kViolation;
  Witness w;
  std::string const cond =
    best.contains("conditioned_value") ? fmt::format(" with one user at value {}", Num(best["conditioned_value"])) : "";
  w.description = fmt::format("expected revenue changes by {} between n={} and n={}{}", Num(best["diff"]),
                              best["n_a"].get<std::size_t>(), best["n_b"].get<std::size_t>(), cond);
  w.gain        = std::abs(best["diff"].get<double>());
  w.std_err     = best["stderr"];
  w.detail      = best;
  auto const na = best["n_a"].get<std::size_t>();
  auto const nb = best["n_b"].get<std::size_t>();
  w.replay      = [game = ctx.game, family, na, nb](std::uint64_t seed, std::uint64_t reps) {
    auto revenue = [&](std::size_t n) {
      Game g = game;
      g.n    = n;
      return EstimateRevenue(g, family(n), reps, seed);
    };
    auto const a = revenue(na);
    auto const b = revenue(nb);
    return Gain{std::abs(b.mean - a.mean), std::hypot(a.std_err, b.std_err)};
  };
  verdict.witness = std::move(w);
  return verdict;
}

PropertyVerdict RunChecker(std::string_view name, CheckContext const &ctx)
{
  if (name == kUserSimplicity)
  {
    return CheckUserSimplicity(ctx);
  }
  if (name == kMinerSimplicity)
  {
    return CheckMinerSimplicity(ctx);
  }
  if (name == kStrongCollusion)
  {
    return CheckStrongCollusion(ctx);
  }
  if (name == kOffChainInfluence)
  {
    return CheckOffChainInfluence(ctx);
  }
  if (name == kWeakCollusion)
  {
    return CheckWeakCollusion(ctx);
  }
  if (name == kTrustlessCollusion)
  {
    return CheckTrustlessCollusion(ctx);
  }
  throw InvalidParameter(fmt::format("unknown checker '{}'", name));
}

// ---------------------------------------------------------------------------

std::vector<std::string> const &Table1Labels()
{
  static std::vector<std::string> const labels = {"C2PA",      "EIP-1559",  "P2PA",    "BoMB-pp",
                                                  "WPB-σval", "SR2PA-2PA", "BoMB-wpb", "SR2PA-1PA"};
  return labels;
}

namespace {

std::size_t DisplayWidth(std::string_view s)
{
  std::size_t width = 0;
  for (char c : s)
  {
    // count UTF-8 lead bytes only
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80)
    {
      ++width;
    }
  }
  return width;
}

std::string Pad(std::string_view s, std::size_t width)
{
  std::string out(s);
  for (std::size_t w = DisplayWidth(s); w < width; ++w)
  {
    out.push_back(' ');
  }
  return out;
}

}  // namespace

std::string PropertyMatrix::Render() const
{
  constexpr std::size_t kLabel = 12;
  constexpr std::size_t kCol   = 16;
  auto mark = [](bool ok) { return ok ? "✓" : "✗"; };
  std::string out = Pad("Mechanism", kLabel) + Pad("Off-chain IP", kCol) + Pad("User simple", kCol) + "Miner simple\n";
  for (auto const &r : rows)
  {
    out += Pad(r.label, kLabel) + Pad(mark(r.off_chain_influence), kCol) + Pad(mark(r.user_simple), kCol) +
           mark(r.miner_simple) + "\n";
  }
  return out;
}

PropertyMatrix BuildPropertyMatrix(std::vector<ScenarioVerdicts> const &scenarios)
{
  PropertyMatrix matrix;
  for (auto const &label : Table1Labels())
  {
    auto it = std::find_if(scenarios.begin(), scenarios.end(), [&](auto const &s) { return s.label == label; });
    if (it == scenarios.end())
    {
      throw ScenarioGap(fmt::format("property matrix row '{}' has no scenario", label));
    }
    auto lookup = [&](std::string_view property) {
      for (auto const &v : it->verdicts)
      {
        if (v.property == property)
        {
          return !v.Violation();
        }
      }
      throw ScenarioGap(fmt::format("row '{}' lacks a {} verdict", label, property));
    };
    matrix.rows.push_back(
      {label, lookup(kOffChainInfluence), lookup(kUserSimplicity), lookup(kMinerSimplicity)});
  }
  return matrix;
}

std::vector<RankingEntry> CompareOnChainEquilibria(Game const &game, std::vector<EquilibriumEntry> const &equilibria,
                                                   std::uint64_t reps, std::uint64_t seed)
{
  std::vector<RankingEntry> ranking;
  for (auto const &e : equilibria)
  {
    ranking.push_back({e.label, EstimateRevenue(game, e.profile, reps, seed)});
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](auto const &a, auto const &b) { return a.revenue.mean > b.revenue.mean; });
  return ranking;
}

}  // namespace tfmlab
