#include "tfmlab/engine.hpp"

#include "tfmlab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace tfmlab {
namespace {

constexpr std::uint64_t kBlockSize = 4096;

std::atomic<std::size_t>   g_workers{std::max(1u, std::thread::hardware_concurrency())};
std::atomic<std::uint64_t> g_replications{0};

std::vector<Moments> MergeRange(std::vector<std::vector<Moments>> const &blocks, std::size_t lo, std::size_t hi)
{
  if (hi - lo == 1)
  {
    return blocks[lo];
  }
  std::size_t const mid   = lo + (hi - lo) / 2;
  auto              left  = MergeRange(blocks, lo, mid);
  auto const        right = MergeRange(blocks, mid, hi);
  for (std::size_t c = 0; c < left.size(); ++c)
  {
    left[c] = Moments::Merge(left[c], right[c]);
  }
  return left;
}

// price a user pays on-chain when the miner includes her at the lowest admissible bid
double OnChainEntryPrice(Game const &game, OnChainProfile const &base)
{
  switch (game.mech.kind)
  {
  case MechanismKind::kEip1559:
    return game.mech.price;
  case MechanismKind::kPostedPlain:
  case MechanismKind::kPostedCrypto:
    return base.miner.CompliantAdvice();
  default:
    return 0.0;
  }
}

}  // namespace

std::size_t ShadingK(MechanismConfig const &cfg)
{
  switch (cfg.kind)
  {
  case MechanismKind::kCk1pa:
  case MechanismKind::kPk1pa:
  case MechanismKind::kWinnerPaysBid:
    return cfg.k;
  default:
    return 1;
  }
}

// ---------------------------------------------------------------------------

OnChainProfile OnChainProfile::Symmetric(MinerStrategy miner, UserStrategy user, std::size_t n)
{
  OnChainProfile p;
  p.miner = std::move(miner);
  p.users.assign(n, user);
  return p;
}

OnChainProfile OnChainProfile::Bound(Game const &game) const
{
  OnChainProfile p = *this;
  auto const     ctx = game.Context();
  for (auto &u : p.users)
  {
    u = u.Bound(ctx);
  }
  return p;
}

bool OnChainProfile::UsersTruthful() const
{
  return std::all_of(users.begin(), users.end(), [](auto const &u) { return u.IsTruthful(); });
}

nlohmann::json OnChainProfile::ToJson() const
{
  nlohmann::json users_json = nlohmann::json::array();
  for (auto const &u : users)
  {
    users_json.push_back(u.ToJson());
  }
  return {{"miner", miner.ToJson()}, {"users", users_json}};
}

// ---------------------------------------------------------------------------

void ResolveUserBids(Game const &game, OnChainProfile const &profile, std::span<double const> values,
                     PlayWorkspace &ws)
{
  if (profile.users.size() != values.size())
  {
    throw InvalidParameter(fmt::format("profile has {} user strategies for {} values", profile.users.size(),
                                       values.size()));
  }
  auto const ctx = game.Context();
  ws.user_bids.clear();
  ws.owner.clear();
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    auto const &s = profile.users[i];
    if (!s.MultiBid())
    {
      ws.user_bids.push_back({static_cast<BidId>(ws.user_bids.size() + 1), s.Bid(values[i], ctx), Origin::kUser});
      ws.owner.push_back(i);
      continue;
    }
    ws.scratch.clear();
    s.Bids(values[i], ctx, ws.scratch);
    for (double b : ws.scratch)
    {
      ws.user_bids.push_back({static_cast<BidId>(ws.user_bids.size() + 1), b, Origin::kUser});
      ws.owner.push_back(i);
    }
  }
}

void PlayResolvedBids(Game const &game, MinerStrategy const &miner, std::span<double const> values,
                      PlayWorkspace &ws)
{
  bool const visible = game.AmountsVisible();
  ws.obs_ids.clear();
  ws.obs_amounts.clear();
  for (auto const &b : ws.user_bids)
  {
    ws.obs_ids.push_back(b.id);
    if (visible)
    {
      ws.obs_amounts.push_back(b.amount);
    }
  }
  ws.action.Reset(ws.user_bids.size());
  miner.Act({ws.obs_ids, ws.obs_amounts, visible}, ws.action);

  auto next = static_cast<BidId>(ws.user_bids.size() + 1);
  if (game.mech.kind == MechanismKind::kDra)
  {
    ws.dra_block.clear();
    ws.revealed.clear();
    for (std::size_t j = 0; j < ws.user_bids.size(); ++j)
    {
      if (ws.action.forward[j])
      {
        ws.dra_block.push_back({ws.user_bids[j], Phase::kReveal});
        ws.revealed.push_back(ws.user_bids[j].amount);
      }
    }
    auto const reveal = DraReveal(ws.action, ws.revealed);
    for (std::size_t j = 0; j < ws.action.fabricated.size(); ++j)
    {
      ws.dra_block.push_back(
        {{next++, ws.action.fabricated[j], Origin::kFabricated}, reveal[j] ? Phase::kReveal : Phase::kConceal});
    }
    Dra(game.mech.reserve, game.mech.conceal_penalty, ws.dra_block, ws.outcome);
  }
  else
  {
    ws.block.clear();
    for (std::size_t j = 0; j < ws.user_bids.size(); ++j)
    {
      if (ws.action.forward[j])
      {
        ws.block.push_back(ws.user_bids[j]);
      }
    }
    for (double f : ws.action.fabricated)
    {
      ws.block.push_back({next++, f, Origin::kFabricated});
    }
    BuildBlock(game.mech, ws.action.advice, ws.block, ws.outcome);
  }

  auto const n = values.size();
  ws.user_utility.assign(n, 0.0);
  ws.user_payment.assign(n, 0.0);
  ws.user_included.assign(n, 0);
  ws.fabricated_payments = 0.0;
  auto const user_count  = ws.user_bids.size();
  for (std::size_t e = 0; e < ws.outcome.ids.size(); ++e)
  {
    BidId const  id  = ws.outcome.ids[e];
    double const pay = ws.outcome.payments[e];
    if (id >= 1 && id <= user_count)
    {
      auto const u = ws.owner[id - 1];
      ws.user_payment[u] += pay;
      if (ws.outcome.included[e])
      {
        ws.user_included[u] = 1;
      }
    }
    else
    {
      ws.fabricated_payments += pay;
    }
  }
  for (std::size_t u = 0; u < n; ++u)
  {
    ws.user_utility[u] = (ws.user_included[u] ? values[u] : 0.0) - ws.user_payment[u];
  }
  ws.miner_utility = ws.outcome.miner_revenue - ws.fabricated_payments;
}

void PlayOnChain(Game const &game, OnChainProfile const &profile, std::span<double const> values, PlayWorkspace &ws)
{
  ResolveUserBids(game, profile, values, ws);
  PlayResolvedBids(game, profile.miner, values, ws);
}

PlayResult PlayOnChain(Game const &game, OnChainProfile const &profile, std::vector<double> const &values)
{
  PlayWorkspace ws;
  PlayOnChain(game, profile, values, ws);
  return {ws.outcome, ws.user_utility, ws.miner_utility};
}

double IncludedValue(PlayWorkspace const &ws, std::span<double const> values)
{
  double total = 0.0;
  for (std::size_t u = 0; u < values.size(); ++u)
  {
    total += ws.user_included[u] ? values[u] : 0.0;
  }
  return total;
}

// ---------------------------------------------------------------------------

Moments Moments::Merge(Moments const &a, Moments const &b)
{
  if (a.count == 0.0)
  {
    return b;
  }
  if (b.count == 0.0)
  {
    return a;
  }
  Moments      out;
  double const delta = b.mean - a.mean;
  out.count          = a.count + b.count;
  out.mean           = a.mean + delta * (b.count / out.count);
  out.m2             = a.m2 + b.m2 + delta * delta * (a.count * b.count / out.count);
  return out;
}

double Moments::StdErr() const
{
  return count > 0.0 ? std::sqrt(Variance() / count) : 0.0;
}

std::vector<Moments> RunReplications(std::uint64_t reps, std::size_t width, std::uint64_t seed,
                                     std::string_view purpose, BodyFactory const &factory)
{
  if (reps == 0)
  {
    return std::vector<Moments>(width);
  }
  std::uint64_t const purpose_key = HashLabel(purpose);
  std::size_t const   blocks      = static_cast<std::size_t>((reps + kBlockSize - 1) / kBlockSize);

  std::vector<std::vector<Moments>> results(blocks);
  std::vector<std::exception_ptr>   errors(blocks);
  std::atomic<std::size_t>          next{0};

  auto work = [&]() {
    ReplicationBody     body;
    std::vector<double> out(width);
    try
    {
      body = factory();
    }
    catch (...)
    {
      // charge the failure to the first block this worker would have taken
      std::size_t const b = next.fetch_add(1);
      if (b < blocks)
      {
        errors[b] = std::current_exception();
      }
      return;
    }
    for (;;)
    {
      std::size_t const b = next.fetch_add(1);
      if (b >= blocks)
      {
        return;
      }
      std::uint64_t const begin = b * kBlockSize;
      std::uint64_t const end   = std::min(reps, begin + kBlockSize);
      std::vector<Moments> m(width);
      try
      {
        for (std::uint64_t t = begin; t < end; ++t)
        {
          RngStream stream(seed, purpose_key, t);
          std::fill(out.begin(), out.end(), 0.0);
          body(stream, out);
          for (std::size_t c = 0; c < width; ++c)
          {
            m[c].Add(out[c]);
          }
        }
      }
      catch (...)
      {
        errors[b] = std::current_exception();
        continue;
      }
      results[b] = std::move(m);
      g_replications.fetch_add(end - begin, std::memory_order_relaxed);
    }
  };

  std::size_t const workers = std::min<std::size_t>(WorkerCount(), blocks);
  if (workers <= 1)
  {
    work();
  }
  else
  {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
      pool.emplace_back(work);
    }
    for (auto &t : pool)
    {
      t.join();
    }
  }
  for (auto const &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }
  return MergeRange(results, 0, blocks);
}

void SetWorkerCount(std::size_t workers)
{
  g_workers.store(std::max<std::size_t>(workers, 1));
}

std::size_t WorkerCount()
{
  return g_workers.load();
}

std::uint64_t ReplicationCount()
{
  return g_replications.load();
}

void DrawValues(ValueDistribution const &d, RngStream &stream, std::span<double> out)
{
  for (auto &v : out)
  {
    v = d.Sample(stream);
  }
}

// ---------------------------------------------------------------------------

SimEstimate SimEstimate::From(Moments const &m, std::uint64_t seed)
{
  return {m.mean, m.StdErr(), static_cast<std::uint64_t>(m.count), seed};
}

nlohmann::json SimEstimate::ToJson() const
{
  return {{"mean", mean}, {"stderr", std_err}, {"reps", replications}, {"seed", seed}};
}

PlayEstimates EstimatePlay(Game const &game, OnChainProfile const &profile, std::uint64_t reps, std::uint64_t seed,
                           std::string_view purpose)
{
  auto const        bound = profile.Bound(game);
  std::size_t const n     = game.n;
  auto              moments = RunReplications(reps, 3 + n, seed, purpose, [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      PlayOnChain(game, bound, *values, *ws);
      out[0] = ws->outcome.miner_revenue;
      out[1] = ws->miner_utility;
      double paid = 0.0;
      for (std::size_t u = 0; u < n; ++u)
      {
        paid += ws->user_payment[u];
        out[3 + u] = ws->user_utility[u];
      }
      out[2] = paid;
    };
  });
  PlayEstimates est;
  est.revenue       = SimEstimate::From(moments[0], seed);
  est.miner_utility = SimEstimate::From(moments[1], seed);
  est.user_payments = SimEstimate::From(moments[2], seed);
  for (std::size_t u = 0; u < n; ++u)
  {
    est.user_utility.push_back(SimEstimate::From(moments[3 + u], seed));
  }
  return est;
}

SimEstimate EstimateRevenue(Game const &game, OnChainProfile const &profile, std::uint64_t reps, std::uint64_t seed)
{
  return EstimatePlay(game, profile, reps, seed, "revenue").revenue;
}

// ---------------------------------------------------------------------------

OffChainMechanism OffChainMechanism::Trivial()
{
  return OffChainMechanism{};
}

OffChainMechanism OffChainMechanism::PostedPrice(double price)
{
  OffChainMechanism m;
  m.kind_  = OffChainKind::kPostedPrice;
  m.param_ = price;
  return m;
}

OffChainMechanism OffChainMechanism::EntryFee(double gamma)
{
  OffChainMechanism m;
  m.kind_  = OffChainKind::kEntryFee;
  m.param_ = gamma;
  return m;
}

OffChainMechanism OffChainMechanism::SecondPrice(double reserve)
{
  OffChainMechanism m;
  m.kind_  = OffChainKind::kSecondPrice;
  m.param_ = reserve;
  return m;
}

OffChainMechanism OffChainMechanism::SteerThreshold(double reserve)
{
  OffChainMechanism m;
  m.kind_  = OffChainKind::kSteerThreshold;
  m.param_ = reserve;
  return m;
}

OffChainMessage OffChainMechanism::Respond(Game const &, double v) const
{
  // every non-trivial mechanism here is a posted price or a second-price rule,
  // for which reporting the value is a best response
  if (kind_ == OffChainKind::kTrivial)
  {
    return {true, 0.0};
  }
  return {false, v};
}

void OffChainMechanism::Resolve(Game const &game, OnChainProfile const &base, std::span<OffChainMessage const> messages,
                                Resolution &out) const
{
  auto const n = base.users.size();
  if (messages.size() != n)
  {
    throw InvalidParameter("one off-chain message per user is required");
  }
  out.users = base.users;
  out.transfers.assign(n, 0.0);
  out.miner = base.miner;

  double const entry = OnChainEntryPrice(game, base);
  switch (kind_)
  {
  case OffChainKind::kTrivial:
    return;
  case OffChainKind::kPostedPrice:
  case OffChainKind::kEntryFee:
  {
    double const       threshold = kind_ == OffChainKind::kPostedPrice ? param_ : entry + param_;
    double const       fee       = kind_ == OffChainKind::kPostedPrice ? param_ - entry : param_;
    std::vector<BidId> paid;
    for (std::size_t i = 0; i < n; ++i)
    {
      if (messages[i].abstain || messages[i].report < threshold)
      {
        continue;
      }
      paid.push_back(static_cast<BidId>(i + 1));
      out.transfers[i] = fee;
      if (kind_ == OffChainKind::kPostedPrice)
      {
        out.users[i] = UserStrategy::Fixed(entry);
      }
    }
    out.miner = MinerStrategy::Composite({base.miner, MinerStrategy::EntryFeeCensor(fee, std::move(paid))});
    return;
  }
  case OffChainKind::kSecondPrice:
  {
    std::size_t winner = n;
    double      best   = 0.0;
    double      second = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      if (messages[i].abstain)
      {
        continue;
      }
      double const r = messages[i].report;
      if (winner == n || r > best)
      {
        second = winner == n ? second : best;
        best   = r;
        winner = i;
      }
      else if (r > second)
      {
        second = r;
      }
    }
    std::vector<BidId> censored;
    for (std::size_t i = 0; i < n; ++i)
    {
      censored.push_back(static_cast<BidId>(i + 1));
    }
    if (winner < n && best >= param_)
    {
      censored.erase(censored.begin() + static_cast<std::ptrdiff_t>(winner));
      out.users[winner]     = UserStrategy::Fixed(0.0);
      out.transfers[winner] = std::max(second, param_);
    }
    out.miner = MinerStrategy::Composite({MinerStrategy::Compliant(0.0), MinerStrategy::CensorIds(std::move(censored))});
    return;
  }
  case OffChainKind::kSteerThreshold:
    for (std::size_t i = 0; i < n; ++i)
    {
      if (!messages[i].abstain)
      {
        out.users[i] = UserStrategy::Threshold(param_);
      }
    }
    return;
  }
}

std::string OffChainMechanism::Describe() const
{
  switch (kind_)
  {
  case OffChainKind::kTrivial:
    return "trivial";
  case OffChainKind::kPostedPrice:
    return fmt::format("off_chain_posted_price({:.6g})", param_);
  case OffChainKind::kEntryFee:
    return fmt::format("entry_fee({:.6g})", param_);
  case OffChainKind::kSecondPrice:
    return fmt::format("off_chain_second_price(reserve={:.6g})", param_);
  case OffChainKind::kSteerThreshold:
    return fmt::format("steer_threshold({:.6g})", param_);
  }
  return "?";
}

nlohmann::json OffChainMechanism::ToJson() const
{
  static constexpr char const *kNames[] = {"trivial", "off_chain_posted_price", "entry_fee", "off_chain_second_price",
                                           "steer_threshold"};
  return {{"kind", kNames[static_cast<int>(kind_)]}, {"param", param_}};
}

void PlayOffChain(Game const &game, OnChainProfile const &base, OffChainMechanism const &off,
                  std::span<OffChainMessage const> messages, std::span<double const> values, OffChainWorkspace &ws)
{
  off.Resolve(game, base, messages, ws.resolution);
  ws.resolved.miner = ws.resolution.miner;
  ws.resolved.users = ws.resolution.users;
  PlayOnChain(game, ws.resolved, values, ws.play);
  double collected = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    ws.play.user_utility[i] -= ws.resolution.transfers[i];
    collected += ws.resolution.transfers[i];
  }
  ws.play.miner_utility += collected;
}

void PlayOffChain(Game const &game, OnChainProfile const &base, OffChainMechanism const &off,
                  std::span<double const> values, OffChainWorkspace &ws)
{
  ws.messages.clear();
  for (double v : values)
  {
    ws.messages.push_back(off.Respond(game, v));
  }
  PlayOffChain(game, base, off, ws.messages, values, ws);
}

std::vector<OffChainMechanism> KnownOffChainAttacks(Game const &game)
{
  std::vector<OffChainMechanism> attacks;
  auto const                    &d = game.dist;
  switch (game.mech.kind)
  {
  case MechanismKind::kEip1559:
  {
    double const p = game.mech.price;
    try
    {
      attacks.push_back(OffChainMechanism::PostedPrice(InverseVirtual(d, p)));
    }
    catch (OutOfRange const &)
    {
      // price outside the range of φ: no posted-price attack
    }
    // fee maximising γ·(1 − F(p + γ)) on a grid
    double const span       = std::max(0.0, d.EffectiveHi() - p);
    double       best_gamma = 0.0;
    double       best_rev   = 0.0;
    for (int i = 0; i <= 100; ++i)
    {
      double const gamma = span * i / 100.0;
      double const rev   = gamma * (1.0 - d.Cdf(p + gamma));
      if (rev > best_rev)
      {
        best_rev   = rev;
        best_gamma = gamma;
      }
    }
    attacks.push_back(OffChainMechanism::EntryFee(best_gamma));
    break;
  }
  case MechanismKind::kSr2pa:
    attacks.push_back(OffChainMechanism::SecondPrice(MonopolyReserveOrFallback(d).value));
    break;
  case MechanismKind::kBomb:
    attacks.push_back(OffChainMechanism::SteerThreshold(game.mech.reserve));
    break;
  default:
    break;
  }
  return attacks;
}

}  // namespace tfmlab
