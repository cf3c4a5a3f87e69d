#pragma once

#include "json.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tfmlab {

using BidId = std::uint32_t;

enum class Origin : std::uint8_t
{
  kUser,
  kFabricated
};

struct Bid
{
  BidId  id;
  double amount;
  Origin origin{Origin::kUser};
};

enum class Phase : std::uint8_t
{
  kReveal,
  kConceal
};

struct DraBid
{
  Bid   bid;
  Phase phase{Phase::kReveal};
};

/**
 * Result of one block-building call. Entries are parallel to the input bids.
 */
struct Outcome
{
  std::vector<BidId>        ids;
  std::vector<std::uint8_t> included;
  std::vector<double>       payments;
  double                    miner_revenue{0.0};
  double                    burned{0.0};
  double                    penalties_collected{0.0};

  void Reset(std::size_t size);

  bool               IsIncluded(BidId id) const;
  double             PaymentOf(BidId id) const;
  std::vector<BidId> IncludedIds() const;
  double             TotalPayments() const;
};

enum class MechanismKind
{
  kEip1559,
  kCk1pa,
  kPk1pa,
  kWinnerPaysBid,
  kPostedPlain,
  kPostedCrypto,
  kBomb,
  kSr2pa,
  kDra
};

enum class CryptoModel
{
  kPlaintext,
  kGatekeeper,
  kDeferred
};

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

struct MechanismConfig
{
  MechanismKind kind{MechanismKind::kCk1pa};
  std::size_t   k{1};
  double        price{0.0};            // eip1559
  double        reserve{0.0};          // builder-known reserve: bomb, dra
  double        conceal_penalty{0.0};  // dra
  CryptoModel   crypto{CryptoModel::kGatekeeper};

  // whether the miner's advice enters the block-building process
  bool TakesAdvice() const;
  // number of winners an off-chain designer could serve through this process
  std::size_t Capacity() const;
  // per-inclusion money destroyed, if the mechanism fits the burn-per-inclusion model
  std::optional<double> BurnPerInclusion() const;

  void Validate() const;

  static MechanismConfig FromJson(nlohmann::json const &j);
  nlohmann::json         ToJson() const;
  std::string            Describe() const;
};

std::string_view                KindName(MechanismKind kind);
std::optional<MechanismKind>    ParseKind(std::string_view name);
std::string_view                CryptoName(CryptoModel model);
std::optional<CryptoModel>      ParseCrypto(std::string_view name);
CryptoModel                     DefaultCrypto(MechanismKind kind);
std::vector<MechanismKind> const &AllKinds();

// Block-building processes. The in-place forms reuse the outcome's storage.
void Eip1559(double price, std::span<Bid const> bids, Outcome &out);
void KPlusOnePrice(std::size_t k, double reserve, std::span<Bid const> bids, Outcome &out);
void WinnerPaysBid(std::size_t k, double reserve, std::span<Bid const> bids, Outcome &out);
void PostedPrice(double reserve, std::span<Bid const> bids, Outcome &out);
void Bomb(double reserve, std::span<Bid const> bids, Outcome &out);
void Sr2pa(double reserve, std::span<Bid const> bids, Outcome &out);
void Dra(double reserve, double conceal_penalty, std::span<DraBid const> bids, Outcome &out);

Outcome Eip1559(double price, std::span<Bid const> bids);
Outcome KPlusOnePrice(std::size_t k, double reserve, std::span<Bid const> bids);
Outcome WinnerPaysBid(std::size_t k, double reserve, std::span<Bid const> bids);
Outcome PostedPrice(double reserve, std::span<Bid const> bids);
Outcome Bomb(double reserve, std::span<Bid const> bids);
Outcome Sr2pa(double reserve, std::span<Bid const> bids);
Outcome Dra(double reserve, double conceal_penalty, std::span<DraBid const> bids);

// Dispatch on the configured kind. For dra every bid is treated as revealed.
void    BuildBlock(MechanismConfig const &cfg, double advice, std::span<Bid const> bids, Outcome &out);
Outcome BuildBlock(MechanismConfig const &cfg, double advice, std::span<Bid const> bids);

// convenience for tests and bindings: ids 1..n in order
std::vector<Bid> MakeBids(std::vector<double> const &amounts);

}  // namespace tfmlab
