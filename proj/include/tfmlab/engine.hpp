#pragma once

#include "tfmlab/agents.hpp"
#include "tfmlab/dist.hpp"
#include "tfmlab/mech.hpp"
#include "tfmlab/rng.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tfmlab {

// ---------------------------------------------------------------------------
// Game setup

// k used by the pay-your-bid shading equilibrium on this mechanism
std::size_t ShadingK(MechanismConfig const &cfg);

struct Game
{
  MechanismConfig   mech;
  ValueDistribution dist;
  std::size_t       n{2};

  BidContext Context() const
  {
    return {n, &dist, ShadingK(mech)};
  }
  bool AmountsVisible() const
  {
    return mech.crypto == CryptoModel::kPlaintext;
  }
};

struct OnChainProfile
{
  MinerStrategy             miner;
  std::vector<UserStrategy> users;

  static OnChainProfile Symmetric(MinerStrategy miner, UserStrategy user, std::size_t n);

  // binds shading tables for the game's n; call once before hot loops
  OnChainProfile Bound(Game const &game) const;
  bool           UsersTruthful() const;
  nlohmann::json ToJson() const;
};

// ---------------------------------------------------------------------------
// On-chain play

/**
 * Scratch space and results of one play. User bids carry ids 1..B in user
 * order, fabricated bids follow. Reused across replications by one worker.
 */
struct PlayWorkspace
{
  std::vector<Bid>          user_bids;
  std::vector<std::size_t>  owner;  // user index of user_bids[j]
  std::vector<BidId>        obs_ids;
  std::vector<double>       obs_amounts;
  MinerAction               action;
  std::vector<Bid>          block;
  std::vector<DraBid>       dra_block;
  std::vector<double>       revealed;
  std::vector<double>       scratch;
  Outcome                   outcome;
  std::vector<double>       user_utility;
  std::vector<double>       user_payment;
  std::vector<std::uint8_t> user_included;
  double                    miner_utility{0.0};
  double                    fabricated_payments{0.0};
};

// fills ws.user_bids/ws.owner from the profile's user strategies
void ResolveUserBids(Game const &game, OnChainProfile const &profile, std::span<double const> values,
                     PlayWorkspace &ws);

// runs the miner, the block-building process and the accounting on ws.user_bids
void PlayResolvedBids(Game const &game, MinerStrategy const &miner, std::span<double const> values,
                      PlayWorkspace &ws);

void PlayOnChain(Game const &game, OnChainProfile const &profile, std::span<double const> values, PlayWorkspace &ws);

struct PlayResult
{
  Outcome             outcome;
  std::vector<double> user_utility;
  double              miner_utility{0.0};
};

PlayResult PlayOnChain(Game const &game, OnChainProfile const &profile, std::vector<double> const &values);

// Σ vᵢ over users with at least one included bid
double IncludedValue(PlayWorkspace const &ws, std::span<double const> values);

// ---------------------------------------------------------------------------
// Replication runner

struct Moments
{
  double count{0.0};
  double mean{0.0};
  double m2{0.0};

  void Add(double x)
  {
    count += 1.0;
    double const delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  static Moments Merge(Moments const &a, Moments const &b);

  double Variance() const
  {
    return count > 1.0 ? m2 / (count - 1.0) : 0.0;
  }
  double StdErr() const;
};

using ReplicationBody = std::function<void(RngStream &stream, std::span<double> out)>;
using BodyFactory     = std::function<ReplicationBody()>;

/**
 * Runs `reps` replications of a body writing `width` statistics each. Replication t
 * sees RngStream(seed, purpose, t). Work is split into fixed-size blocks that are
 * merged in a fixed pairwise order, so results do not depend on the worker count.
 * The factory is called once per worker so bodies may own scratch space.
 */
std::vector<Moments> RunReplications(std::uint64_t reps, std::size_t width, std::uint64_t seed,
                                     std::string_view purpose, BodyFactory const &factory);

void          SetWorkerCount(std::size_t workers);
std::size_t   WorkerCount();
// total replications executed by this process
std::uint64_t ReplicationCount();

void DrawValues(ValueDistribution const &d, RngStream &stream, std::span<double> out);

// ---------------------------------------------------------------------------
// Estimates

struct SimEstimate
{
  double        mean{0.0};
  double        std_err{0.0};
  std::uint64_t replications{0};
  std::uint64_t seed{0};

  static SimEstimate From(Moments const &m, std::uint64_t seed);
  nlohmann::json     ToJson() const;
};

struct PlayEstimates
{
  SimEstimate              revenue;
  SimEstimate              miner_utility;
  SimEstimate              user_payments;
  std::vector<SimEstimate> user_utility;
};

PlayEstimates EstimatePlay(Game const &game, OnChainProfile const &profile, std::uint64_t reps, std::uint64_t seed,
                           std::string_view purpose = "estimate");

// expected miner revenue Rev
SimEstimate EstimateRevenue(Game const &game, OnChainProfile const &profile, std::uint64_t reps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Off-chain game

enum class OffChainKind
{
  kTrivial,
  kPostedPrice,  // pay (price - on-chain price) off-chain, bid the on-chain price; others censored
  kEntryFee,     // pay a fee off-chain, bid as before; non-payers censored
  kSecondPrice,  // off-chain second-price auction, winner bids zero on-chain, others censored
  kSteerThreshold  // announce the threshold equilibrium at the builder reserve
};

struct OffChainMessage
{
  bool   abstain{true};
  double report{0.0};
};

struct Resolution
{
  MinerStrategy             miner;
  std::vector<UserStrategy> users;
  std::vector<double>       transfers;  // p_off per user
};

class OffChainMechanism
{
public:
  static OffChainMechanism Trivial();
  static OffChainMechanism PostedPrice(double price);
  static OffChainMechanism EntryFee(double gamma);
  static OffChainMechanism SecondPrice(double reserve);
  static OffChainMechanism SteerThreshold(double reserve);

  OffChainKind kind() const
  {
    return kind_;
  }
  double param() const
  {
    return param_;
  }

  // documented user best response
  OffChainMessage Respond(Game const &game, double v) const;

  // Abstainers keep their base strategy and pay nothing. Non-abstaining messages are
  // the only input to the rules applied to participants.
  void Resolve(Game const &game, OnChainProfile const &base, std::span<OffChainMessage const> messages,
               Resolution &out) const;

  std::string    Describe() const;
  nlohmann::json ToJson() const;

private:
  OffChainKind kind_{OffChainKind::kTrivial};
  double       param_{0.0};
};

struct OffChainWorkspace
{
  PlayWorkspace                play;
  std::vector<OffChainMessage> messages;
  Resolution                   resolution;
  OnChainProfile               resolved;
};

// user utilities and miner utility in ws.play include the off-chain transfers
void PlayOffChain(Game const &game, OnChainProfile const &base, OffChainMechanism const &off,
                  std::span<OffChainMessage const> messages, std::span<double const> values, OffChainWorkspace &ws);

// messages from the documented best responses
void PlayOffChain(Game const &game, OnChainProfile const &base, OffChainMechanism const &off,
                  std::span<double const> values, OffChainWorkspace &ws);

std::vector<OffChainMechanism> KnownOffChainAttacks(Game const &game);

}  // namespace tfmlab
