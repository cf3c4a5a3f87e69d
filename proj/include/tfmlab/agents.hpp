#pragma once

#include "tfmlab/dist.hpp"
#include "tfmlab/mech.hpp"

#include "json.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tfmlab {

// ---------------------------------------------------------------------------
// Equilibrium shading for pay-your-bid allocation

// E[max(r, Y_k) | Y_k <= v], Y_k the k-th highest of n-1 other values
double ShadeWinnerPaysBid(ValueDistribution const &d, std::size_t n, std::size_t k, double reserve, double v);

/**
 * Tabulated shading function on [reserve, EffectiveHi()], linear interpolation
 * between nodes. Values above the table fall back to direct quadrature.
 */
class ShadingTable
{
public:
  ShadingTable(ValueDistribution const &d, std::size_t n, std::size_t k, double reserve, std::size_t nodes = 4097);

  double operator()(double v) const;
  double reserve() const
  {
    return reserve_;
  }

private:
  ValueDistribution   d_;
  std::size_t         n_;
  std::size_t         k_;
  double              reserve_;
  double              top_;
  double              step_;
  std::vector<double> bids_;
};

// shared, memoised table (thread-safe)
std::shared_ptr<ShadingTable const> GetShadingTable(ValueDistribution const &d, std::size_t n, std::size_t k,
                                                    double reserve);

// ---------------------------------------------------------------------------
// User strategies

enum class UserStrategyKind
{
  kTruthful,
  kShadeWpb,
  kThreshold,
  kFixed,
  kDraTruthfulReveal,
  kCustom
};

enum class BelowReserve
{
  kBidValue,
  kBidZero
};

struct BidContext
{
  std::size_t              n{0};
  ValueDistribution const *d{nullptr};
  std::size_t              k{1};
};

class UserStrategy
{
public:
  using CustomFn = std::function<std::vector<double>(double)>;

  static UserStrategy Truthful();
  static UserStrategy ShadeWpb(double reserve, BelowReserve below);
  static UserStrategy Threshold(double reserve);
  static UserStrategy Fixed(double bid);
  static UserStrategy DraTruthfulReveal();
  static UserStrategy Custom(std::string name, CustomFn fn);

  UserStrategyKind kind() const
  {
    return kind_;
  }
  double param() const
  {
    return param_;
  }
  BelowReserve below() const
  {
    return below_;
  }
  // emits exactly the value
  bool IsTruthful() const
  {
    return kind_ == UserStrategyKind::kTruthful || kind_ == UserStrategyKind::kDraTruthfulReveal;
  }
  // true iff the strategy can emit more or fewer than one bid
  bool MultiBid() const
  {
    return kind_ == UserStrategyKind::kCustom;
  }

  // resolves context-dependent pieces (the shading table); cheap to copy afterwards
  UserStrategy Bound(BidContext const &ctx) const;

  // single-bid strategies
  double Bid(double v, BidContext const &ctx) const;
  // general form
  void Bids(double v, BidContext const &ctx, std::vector<double> &out) const;

  std::string    Name() const;
  nlohmann::json ToJson() const;

private:
  UserStrategyKind                    kind_{UserStrategyKind::kTruthful};
  double                              param_{0.0};
  BelowReserve                        below_{BelowReserve::kBidValue};
  std::string                         name_;
  std::shared_ptr<CustomFn const>     custom_;
  std::shared_ptr<ShadingTable const> table_;
  std::size_t                         bound_n_{0};
};

std::vector<double> UserBid(UserStrategy const &s, double v, BidContext const &ctx);

// ---------------------------------------------------------------------------
// Miner strategies

enum class MinerStrategyKind
{
  kCompliant,
  kCensor,
  kFabricate,
  kReserveAtMaxBid,
  kP2paRevenueReserve,
  kEntryFeeCensor,
  kDraSelectiveReveal,
  kComposite
};

enum class InfoTag
{
  kPlaintext,
  kGatekeeper,
  kDeferredPhase2
};

struct MinerObservation
{
  std::span<BidId const>  ids;
  std::span<double const> amounts;  // empty unless amounts_visible
  bool                    amounts_visible{false};
};

struct MinerAction
{
  double                    advice{0.0};
  std::vector<std::uint8_t> forward;     // parallel to observation ids
  std::vector<double>       fabricated;  // amounts, ids assigned by the engine
  std::vector<std::uint8_t> selective;   // fabricated bid is subject to selective reveal

  void Reset(std::size_t observed);

  std::vector<BidId> IncludeIds(std::span<BidId const> ids) const;
};

class MinerStrategy
{
public:
  static MinerStrategy Compliant(double advice);
  static MinerStrategy CensorLowest(std::size_t count);
  static MinerStrategy CensorIds(std::vector<BidId> ids);
  static MinerStrategy Fabricate(std::vector<double> bids);
  static MinerStrategy ReserveAtMaxBid();
  static MinerStrategy P2paRevenueReserve(std::size_t k);
  static MinerStrategy EntryFeeCensor(double gamma, std::vector<BidId> paid);
  static MinerStrategy DraSelectiveReveal(std::vector<double> grid);
  static MinerStrategy Composite(std::vector<MinerStrategy> parts);

  MinerStrategyKind kind() const
  {
    return kind_;
  }
  double advice() const
  {
    return advice_;
  }
  std::vector<MinerStrategy> const &parts() const
  {
    return parts_;
  }
  std::vector<double> const &bids() const
  {
    return bids_;
  }

  InfoTag Info() const;
  bool    NeedsAmounts() const;
  // compliant(a), or a composite made only of compliant parts
  bool IsCompliant() const;
  // advice a compliant strategy sets
  double CompliantAdvice() const;

  std::string    Describe() const;
  nlohmann::json ToJson() const;

  void Act(MinerObservation const &obs, MinerAction &action) const;

private:
  MinerStrategyKind          kind_{MinerStrategyKind::kCompliant};
  double                     advice_{0.0};
  std::size_t                count_{0};
  std::vector<BidId>         ids_;
  std::vector<double>        bids_;
  std::vector<MinerStrategy> parts_;
};

// Folds the strategy over the default action (advice 0, forward all, fabricate nothing).
// Throws InfoViolation when an amount-reading strategy is given an ids-only observation.
MinerAction MinerAct(MinerStrategy const &s, MinerObservation const &obs);

// Phase-two reveal decision for fabricated bids: revealed[j] for fabricated[j].
std::vector<std::uint8_t> DraReveal(MinerAction const &action, std::span<double const> revealed_user_bids);

}  // namespace tfmlab
