#include "tfmlab/agents.hpp"

#include "tfmlab/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace tfmlab {
namespace {

constexpr double kShadeTolerance = 1e-8;

// P(Y_k <= y) for Y_k the k-th highest of m draws
double KthHighestCdf(ValueDistribution const &d, std::size_t m, std::size_t k, double y)
{
  if (m < k)
  {
    return 1.0;
  }
  double const F = d.Cdf(y);
  double const S = 1.0 - F;
  // sum over j < k draws above y: C(m, j) S^j F^(m - j)
  double total = 0.0;
  double coef  = 1.0;
  for (std::size_t j = 0; j < k; ++j)
  {
    if (j > 0)
    {
      coef *= static_cast<double>(m - j + 1) / static_cast<double>(j);
    }
    total += coef * std::pow(S, static_cast<double>(j)) * std::pow(F, static_cast<double>(m - j));
  }
  return std::min(1.0, total);
}

std::string CacheKey(ValueDistribution const &d, std::size_t n, std::size_t k, double reserve)
{
  return fmt::format("{}|{}|{}|{:a}", d.ToJson().dump(), n, k, reserve);
}

std::string_view BelowName(BelowReserve below)
{
  return below == BelowReserve::kBidValue ? "bid_value" : "bid_zero";
}

}  // namespace

double ShadeWinnerPaysBid(ValueDistribution const &d, std::size_t n, std::size_t k, double reserve, double v)
{
  if (n == 0 || k == 0)
  {
    throw InvalidParameter("shading: need n >= 1 and k >= 1");
  }
  if (v < reserve)
  {
    throw OutOfRange(fmt::format("shading: value {} below reserve {}", v, reserve));
  }
  std::size_t const m = n - 1;
  if (m < k)
  {
    return std::max(reserve, 0.0);
  }
  double const Gv = KthHighestCdf(d, m, k, v);
  if (!(Gv > 0.0) || v == reserve)
  {
    return v;
  }
  double error    = 0.0;
  auto   integrand = [&](double y) { return KthHighestCdf(d, m, k, y); };
  double const area = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, reserve, v, 15, 1e-12,
                                                                                      &error);
  if (!std::isfinite(area) || error > kShadeTolerance)
  {
    throw NumericFailure(fmt::format("shading: quadrature error {} at v={}", error, v));
  }
  return v - area / Gv;
}

ShadingTable::ShadingTable(ValueDistribution const &d, std::size_t n, std::size_t k, double reserve, std::size_t nodes)
  : d_(d)
  , n_(n)
  , k_(k)
  , reserve_(reserve)
  , top_(std::max(reserve, d.EffectiveHi()))
  , step_(0.0)
{
  nodes = std::max<std::size_t>(nodes, 2);
  step_ = (top_ - reserve_) / static_cast<double>(nodes - 1);
  bids_.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
  {
    double const v = i + 1 == nodes ? top_ : reserve_ + step_ * static_cast<double>(i);
    bids_.push_back(ShadeWinnerPaysBid(d_, n_, k_, reserve_, v));
  }
}

double ShadingTable::operator()(double v) const
{
  if (v <= reserve_ || !(step_ > 0.0))
  {
    return bids_.front();
  }
  if (v >= top_)
  {
    return v == top_ ? bids_.back() : ShadeWinnerPaysBid(d_, n_, k_, reserve_, v);
  }
  double const pos = (v - reserve_) / step_;
  auto         i   = static_cast<std::size_t>(pos);
  if (i + 1 >= bids_.size())
  {
    return bids_.back();
  }
  double const t = pos - static_cast<double>(i);
  return bids_[i] + t * (bids_[i + 1] - bids_[i]);
}

std::shared_ptr<ShadingTable const> GetShadingTable(ValueDistribution const &d, std::size_t n, std::size_t k,
                                                    double reserve)
{
  static std::mutex                                                 mutex;
  static std::map<std::string, std::shared_ptr<ShadingTable const>> cache;
  auto const                                                        key = CacheKey(d, n, k, reserve);
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto                        it = cache.find(key);
    if (it != cache.end())
    {
      return it->second;
    }
  }
  auto table = std::make_shared<ShadingTable const>(d, n, k, reserve);
  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(table)).first->second;
}

// ---------------------------------------------------------------------------

UserStrategy UserStrategy::Truthful()
{
  return UserStrategy{};
}

UserStrategy UserStrategy::ShadeWpb(double reserve, BelowReserve below)
{
  UserStrategy s;
  s.kind_  = UserStrategyKind::kShadeWpb;
  s.param_ = reserve;
  s.below_ = below;
  return s;
}

UserStrategy UserStrategy::Threshold(double reserve)
{
  UserStrategy s;
  s.kind_  = UserStrategyKind::kThreshold;
  s.param_ = reserve;
  return s;
}

UserStrategy UserStrategy::Fixed(double bid)
{
  if (bid < 0.0)
  {
    throw InvalidParameter("fixed bid must be >= 0");
  }
  UserStrategy s;
  s.kind_  = UserStrategyKind::kFixed;
  s.param_ = bid;
  return s;
}

UserStrategy UserStrategy::DraTruthfulReveal()
{
  UserStrategy s;
  s.kind_ = UserStrategyKind::kDraTruthfulReveal;
  return s;
}

UserStrategy UserStrategy::Custom(std::string name, CustomFn fn)
{
  UserStrategy s;
  s.kind_   = UserStrategyKind::kCustom;
  s.name_   = std::move(name);
  s.custom_ = std::make_shared<CustomFn const>(std::move(fn));
  return s;
}

UserStrategy UserStrategy::Bound(BidContext const &ctx) const
{
  UserStrategy s = *this;
  if (kind_ == UserStrategyKind::kShadeWpb && ctx.d != nullptr && ctx.n > 0)
  {
    s.table_   = GetShadingTable(*ctx.d, ctx.n, ctx.k, param_);
    s.bound_n_ = ctx.n;
  }
  return s;
}

double UserStrategy::Bid(double v, BidContext const &ctx) const
{
  switch (kind_)
  {
  case UserStrategyKind::kTruthful:
  case UserStrategyKind::kDraTruthfulReveal:
    return v;
  case UserStrategyKind::kShadeWpb:
  {
    if (v < param_)
    {
      return below_ == BelowReserve::kBidValue ? v : 0.0;
    }
    if (table_ && bound_n_ == ctx.n)
    {
      return (*table_)(v);
    }
    if (ctx.d == nullptr)
    {
      throw InvalidParameter("shade_wpb needs a distribution in its bid context");
    }
    return (*GetShadingTable(*ctx.d, ctx.n, ctx.k, param_))(v);
  }
  case UserStrategyKind::kThreshold:
    return v >= param_ ? param_ : 0.0;
  case UserStrategyKind::kFixed:
    return param_;
  case UserStrategyKind::kCustom:
  {
    auto bids = (*custom_)(v);
    if (bids.size() != 1)
    {
      throw InvalidParameter(fmt::format("custom strategy '{}' emitted {} bids where one was expected", name_,
                                         bids.size()));
    }
    return bids.front();
  }
  }
  return v;
}

void UserStrategy::Bids(double v, BidContext const &ctx, std::vector<double> &out) const
{
  if (kind_ == UserStrategyKind::kCustom)
  {
    auto bids = (*custom_)(v);
    for (double b : bids)
    {
      if (b < 0.0)
      {
        throw InvalidParameter(fmt::format("custom strategy '{}' emitted a negative bid", name_));
      }
      out.push_back(b);
    }
    return;
  }
  out.push_back(Bid(v, ctx));
}

std::string UserStrategy::Name() const
{
  switch (kind_)
  {
  case UserStrategyKind::kTruthful:
    return "truthful";
  case UserStrategyKind::kShadeWpb:
    return fmt::format("shade_wpb(r={}, {})", param_, BelowName(below_));
  case UserStrategyKind::kThreshold:
    return fmt::format("threshold({})", param_);
  case UserStrategyKind::kFixed:
    return fmt::format("fixed({})", param_);
  case UserStrategyKind::kDraTruthfulReveal:
    return "dra_truthful_reveal";
  case UserStrategyKind::kCustom:
    return fmt::format("custom({})", name_);
  }
  return "?";
}

nlohmann::json UserStrategy::ToJson() const
{
  switch (kind_)
  {
  case UserStrategyKind::kTruthful:
    return {{"strategy", "truthful"}};
  case UserStrategyKind::kShadeWpb:
    return {{"strategy", "shade_wpb"}, {"reserve", param_}, {"below", BelowName(below_)}};
  case UserStrategyKind::kThreshold:
    return {{"strategy", "threshold"}, {"reserve", param_}};
  case UserStrategyKind::kFixed:
    return {{"strategy", "fixed"}, {"bid", param_}};
  case UserStrategyKind::kDraTruthfulReveal:
    return {{"strategy", "dra_truthful_reveal"}};
  case UserStrategyKind::kCustom:
    return {{"strategy", "custom"}, {"name", name_}};
  }
  return {};
}

std::vector<double> UserBid(UserStrategy const &s, double v, BidContext const &ctx)
{
  std::vector<double> out;
  s.Bids(v, ctx, out);
  return out;
}

// ---------------------------------------------------------------------------

void MinerAction::Reset(std::size_t observed)
{
  advice = 0.0;
  forward.assign(observed, 1);
  fabricated.clear();
  selective.clear();
}

std::vector<BidId> MinerAction::IncludeIds(std::span<BidId const> ids) const
{
  std::vector<BidId> result;
  for (std::size_t i = 0; i < ids.size() && i < forward.size(); ++i)
  {
    if (forward[i])
    {
      result.push_back(ids[i]);
    }
  }
  return result;
}

MinerStrategy MinerStrategy::Compliant(double advice)
{
  MinerStrategy s;
  s.kind_   = MinerStrategyKind::kCompliant;
  s.advice_ = advice;
  return s;
}

MinerStrategy MinerStrategy::CensorLowest(std::size_t count)
{
  MinerStrategy s;
  s.kind_  = MinerStrategyKind::kCensor;
  s.count_ = count;
  return s;
}

MinerStrategy MinerStrategy::CensorIds(std::vector<BidId> ids)
{
  MinerStrategy s;
  s.kind_ = MinerStrategyKind::kCensor;
  std::sort(ids.begin(), ids.end());
  s.ids_ = std::move(ids);
  return s;
}

MinerStrategy MinerStrategy::Fabricate(std::vector<double> bids)
{
  for (double b : bids)
  {
    if (b < 0.0)
    {
      throw InvalidParameter("fabricated bids must be >= 0");
    }
  }
  MinerStrategy s;
  s.kind_ = MinerStrategyKind::kFabricate;
  s.bids_ = std::move(bids);
  return s;
}

MinerStrategy MinerStrategy::ReserveAtMaxBid()
{
  MinerStrategy s;
  s.kind_ = MinerStrategyKind::kReserveAtMaxBid;
  return s;
}

MinerStrategy MinerStrategy::P2paRevenueReserve(std::size_t k)
{
  MinerStrategy s;
  s.kind_  = MinerStrategyKind::kP2paRevenueReserve;
  s.count_ = std::max<std::size_t>(k, 1);
  return s;
}

MinerStrategy MinerStrategy::EntryFeeCensor(double gamma, std::vector<BidId> paid)
{
  MinerStrategy s;
  s.kind_   = MinerStrategyKind::kEntryFeeCensor;
  s.advice_ = gamma;
  std::sort(paid.begin(), paid.end());
  s.ids_ = std::move(paid);
  return s;
}

MinerStrategy MinerStrategy::DraSelectiveReveal(std::vector<double> grid)
{
  MinerStrategy s;
  s.kind_ = MinerStrategyKind::kDraSelectiveReveal;
  s.bids_ = std::move(grid);
  return s;
}

MinerStrategy MinerStrategy::Composite(std::vector<MinerStrategy> parts)
{
  MinerStrategy s;
  s.kind_  = MinerStrategyKind::kComposite;
  s.parts_ = std::move(parts);
  return s;
}

InfoTag MinerStrategy::Info() const
{
  switch (kind_)
  {
  case MinerStrategyKind::kReserveAtMaxBid:
  case MinerStrategyKind::kP2paRevenueReserve:
    return InfoTag::kPlaintext;
  case MinerStrategyKind::kDraSelectiveReveal:
    return InfoTag::kDeferredPhase2;
  case MinerStrategyKind::kComposite:
  {
    InfoTag tag = InfoTag::kGatekeeper;
    for (auto const &part : parts_)
    {
      auto const t = part.Info();
      if (t == InfoTag::kPlaintext)
      {
        return t;
      }
      if (t == InfoTag::kDeferredPhase2)
      {
        tag = t;
      }
    }
    return tag;
  }
  default:
    return InfoTag::kGatekeeper;
  }
}

bool MinerStrategy::NeedsAmounts() const
{
  return Info() == InfoTag::kPlaintext;
}

bool MinerStrategy::IsCompliant() const
{
  if (kind_ == MinerStrategyKind::kCompliant)
  {
    return true;
  }
  if (kind_ == MinerStrategyKind::kComposite && !parts_.empty())
  {
    return std::all_of(parts_.begin(), parts_.end(), [](auto const &p) { return p.IsCompliant(); });
  }
  return false;
}

double MinerStrategy::CompliantAdvice() const
{
  if (kind_ == MinerStrategyKind::kComposite)
  {
    double advice = 0.0;
    for (auto const &part : parts_)
    {
      if (part.kind_ == MinerStrategyKind::kCompliant)
      {
        advice = part.advice_;
      }
    }
    return advice;
  }
  return advice_;
}

std::string MinerStrategy::Describe() const
{
  switch (kind_)
  {
  case MinerStrategyKind::kCompliant:
    return fmt::format("compliant({})", advice_);
  case MinerStrategyKind::kCensor:
    return ids_.empty() ? fmt::format("censor_lowest({})", count_) : fmt::format("censor({})", ids_);
  case MinerStrategyKind::kFabricate:
    return fmt::format("fabricate({})", bids_);
  case MinerStrategyKind::kReserveAtMaxBid:
    return "reserve_at_max_bid";
  case MinerStrategyKind::kP2paRevenueReserve:
    return fmt::format("p2pa_revenue_reserve(k={})", count_);
  case MinerStrategyKind::kEntryFeeCensor:
    return fmt::format("entry_fee_censor(gamma={}, paid={})", advice_, ids_);
  case MinerStrategyKind::kDraSelectiveReveal:
    return fmt::format("dra_selective_reveal({} points)", bids_.size());
  case MinerStrategyKind::kComposite:
  {
    std::vector<std::string> names;
    for (auto const &part : parts_)
    {
      names.push_back(part.Describe());
    }
    return fmt::format("composite[{}]", fmt::join(names, ", "));
  }
  }
  return "?";
}

nlohmann::json MinerStrategy::ToJson() const
{
  switch (kind_)
  {
  case MinerStrategyKind::kCompliant:
    return {{"strategy", "compliant"}, {"advice", advice_}};
  case MinerStrategyKind::kCensor:
    if (ids_.empty())
    {
      return {{"strategy", "censor"}, {"lowest", count_}};
    }
    return {{"strategy", "censor"}, {"ids", ids_}};
  case MinerStrategyKind::kFabricate:
    return {{"strategy", "fabricate"}, {"bids", bids_}};
  case MinerStrategyKind::kReserveAtMaxBid:
    return {{"strategy", "reserve_at_max_bid"}};
  case MinerStrategyKind::kP2paRevenueReserve:
    return {{"strategy", "p2pa_revenue_reserve"}, {"k", count_}};
  case MinerStrategyKind::kEntryFeeCensor:
    return {{"strategy", "entry_fee_censor"}, {"gamma", advice_}, {"paid", ids_}};
  case MinerStrategyKind::kDraSelectiveReveal:
    return {{"strategy", "dra_selective_reveal"}, {"grid", bids_}};
  case MinerStrategyKind::kComposite:
  {
    nlohmann::json parts = nlohmann::json::array();
    for (auto const &part : parts_)
    {
      parts.push_back(part.ToJson());
    }
    return {{"strategy", "composite"}, {"parts", parts}};
  }
  }
  return {};
}

void MinerStrategy::Act(MinerObservation const &obs, MinerAction &action) const
{
  if (NeedsAmounts() && !obs.amounts_visible)
  {
    throw InfoViolation(fmt::format("miner strategy {} reads bid amounts but only ids are observable", Describe()));
  }
  auto const n = obs.ids.size();
  switch (kind_)
  {
  case MinerStrategyKind::kCompliant:
    action.advice = advice_;
    action.forward.assign(n, 1);
    action.fabricated.clear();
    action.selective.clear();
    return;
  case MinerStrategyKind::kCensor:
    if (ids_.empty())
    {
      // drop the count_ smallest ids
      for (std::size_t i = 0; i < n; ++i)
      {
        std::size_t smaller = 0;
        for (std::size_t j = 0; j < n; ++j)
        {
          smaller += obs.ids[j] < obs.ids[i] ? 1 : 0;
        }
        if (smaller < count_)
        {
          action.forward[i] = 0;
        }
      }
    }
    else
    {
      for (std::size_t i = 0; i < n; ++i)
      {
        if (std::binary_search(ids_.begin(), ids_.end(), obs.ids[i]))
        {
          action.forward[i] = 0;
        }
      }
    }
    return;
  case MinerStrategyKind::kFabricate:
    for (double b : bids_)
    {
      action.fabricated.push_back(b);
      action.selective.push_back(0);
    }
    return;
  case MinerStrategyKind::kReserveAtMaxBid:
  {
    bool   any = false;
    double top = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      if (action.forward[i])
      {
        top = any ? std::max(top, obs.amounts[i]) : obs.amounts[i];
        any = true;
      }
    }
    if (any)
    {
      action.advice = top;
    }
    return;
  }
  case MinerStrategyKind::kP2paRevenueReserve:
  {
    thread_local std::vector<double> sorted;
    sorted.clear();
    for (std::size_t i = 0; i < n; ++i)
    {
      if (action.forward[i])
      {
        sorted.push_back(obs.amounts[i]);
      }
    }
    if (sorted.empty())
    {
      return;
    }
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::size_t const limit = std::min(count_, sorted.size());
    double            best  = -1.0;
    for (std::size_t i = 1; i <= limit; ++i)
    {
      double const revenue = static_cast<double>(i) * sorted[i - 1];
      if (revenue > best)
      {
        best          = revenue;
        action.advice = sorted[i - 1];
      }
    }
    return;
  }
  case MinerStrategyKind::kEntryFeeCensor:
    for (std::size_t i = 0; i < n; ++i)
    {
      if (!std::binary_search(ids_.begin(), ids_.end(), obs.ids[i]))
      {
        action.forward[i] = 0;
      }
    }
    return;
  case MinerStrategyKind::kDraSelectiveReveal:
    for (double b : bids_)
    {
      action.fabricated.push_back(b);
      action.selective.push_back(1);
    }
    return;
  case MinerStrategyKind::kComposite:
    for (auto const &part : parts_)
    {
      part.Act(obs, action);
    }
    return;
  }
}

MinerAction MinerAct(MinerStrategy const &s, MinerObservation const &obs)
{
  MinerAction action;
  action.Reset(obs.ids.size());
  s.Act(obs, action);
  return action;
}

std::vector<std::uint8_t> DraReveal(MinerAction const &action, std::span<double const> revealed_user_bids)
{
  bool   any = !revealed_user_bids.empty();
  double top = any ? *std::max_element(revealed_user_bids.begin(), revealed_user_bids.end()) : 0.0;
  std::vector<std::uint8_t> reveal(action.fabricated.size(), 1);
  for (std::size_t j = 0; j < action.fabricated.size(); ++j)
  {
    if (action.selective[j])
    {
      reveal[j] = (any && action.fabricated[j] < top) ? 1 : 0;
    }
  }
  return reveal;
}

}  // namespace tfmlab
