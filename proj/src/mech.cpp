#include "tfmlab/mech.hpp"

#include "tfmlab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>

namespace tfmlab {
namespace {

struct KindEntry
{
  MechanismKind    kind;
  std::string_view name;
};

constexpr std::array<KindEntry, 9> kKinds{{
    {MechanismKind::kEip1559, "eip1559"},
    {MechanismKind::kCk1pa, "c_k1_pa"},
    {MechanismKind::kPk1pa, "p_k1_pa"},
    {MechanismKind::kWinnerPaysBid, "wpb"},
    {MechanismKind::kPostedPlain, "posted_plain"},
    {MechanismKind::kPostedCrypto, "posted_crypto"},
    {MechanismKind::kBomb, "bomb"},
    {MechanismKind::kSr2pa, "sr2pa"},
    {MechanismKind::kDra, "dra"},
}};

// Higher amount first, then smaller id.
bool Ahead(Bid const &a, Bid const &b)
{
  if (a.amount != b.amount)
  {
    return a.amount > b.amount;
  }
  return a.id < b.id;
}

// Indices of bids in priority order. Insertion sort: auctions here are small.
std::vector<std::uint32_t> &RankScratch(std::span<Bid const> bids)
{
  thread_local std::vector<std::uint32_t> order;
  order.resize(bids.size());
  for (std::uint32_t i = 0; i < bids.size(); ++i)
  {
    std::uint32_t j = i;
    while (j > 0 && Ahead(bids[i], bids[order[j - 1]]))
    {
      order[j] = order[j - 1];
      --j;
    }
    order[j] = i;
  }
  return order;
}

void ResetFor(std::span<Bid const> bids, Outcome &out)
{
  out.Reset(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    out.ids[i] = bids[i].id;
  }
}

// Top-k bids at or above the reserve; returns how many were included.
std::size_t IncludeTopK(std::size_t k, double reserve, std::span<Bid const> bids,
                        std::vector<std::uint32_t> const &order, Outcome &out)
{
  std::size_t count = 0;
  for (auto idx : order)
  {
    if (count >= k || bids[idx].amount < reserve)
    {
      break;
    }
    out.included[idx] = 1;
    ++count;
  }
  return count;
}

}  // namespace

void Outcome::Reset(std::size_t size)
{
  ids.assign(size, 0);
  included.assign(size, 0);
  payments.assign(size, 0.0);
  miner_revenue       = 0.0;
  burned              = 0.0;
  penalties_collected = 0.0;
}

bool Outcome::IsIncluded(BidId id) const
{
  for (std::size_t i = 0; i < ids.size(); ++i)
  {
    if (ids[i] == id)
    {
      return included[i] != 0;
    }
  }
  return false;
}

double Outcome::PaymentOf(BidId id) const
{
  for (std::size_t i = 0; i < ids.size(); ++i)
  {
    if (ids[i] == id)
    {
      return payments[i];
    }
  }
  return 0.0;
}

std::vector<BidId> Outcome::IncludedIds() const
{
  std::vector<BidId> result;
  for (std::size_t i = 0; i < ids.size(); ++i)
  {
    if (included[i])
    {
      result.push_back(ids[i]);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

double Outcome::TotalPayments() const
{
  double total = 0.0;
  for (double p : payments)
  {
    total += p;
  }
  return total;
}

bool MechanismConfig::TakesAdvice() const
{
  switch (kind)
  {
  case MechanismKind::kEip1559:
  case MechanismKind::kBomb:
  case MechanismKind::kDra:
    return false;
  default:
    return true;
  }
}

std::size_t MechanismConfig::Capacity() const
{
  switch (kind)
  {
  case MechanismKind::kEip1559:
  case MechanismKind::kPostedPlain:
  case MechanismKind::kPostedCrypto:
  case MechanismKind::kBomb:
    return kUnlimited;
  case MechanismKind::kSr2pa:
  case MechanismKind::kDra:
    return 1;
  default:
    return k;
  }
}

std::optional<double> MechanismConfig::BurnPerInclusion() const
{
  if (kind == MechanismKind::kEip1559)
  {
    return price;
  }
  // every other shipped process either transfers payments to the miner or, for
  // sr2pa, can be bypassed by an off-chain auction that routes all money around it
  return 0.0;
}

void MechanismConfig::Validate() const
{
  if (k < 1)
  {
    throw InvalidParameter("mechanism: k must be >= 1");
  }
  if (price < 0.0 || reserve < 0.0 || conceal_penalty < 0.0)
  {
    throw InvalidParameter("mechanism: price, reserve and p_conceal must be >= 0");
  }
  if ((kind == MechanismKind::kDra) != (crypto == CryptoModel::kDeferred))
  {
    throw InvalidParameter("mechanism: the deferred crypto model is used by dra and only by dra");
  }
}

MechanismConfig MechanismConfig::FromJson(nlohmann::json const &j)
{
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
  {
    throw InvalidParameter("mechanism: expected a table with a string 'kind'");
  }
  auto const kind = ParseKind(j.at("kind").get<std::string>());
  if (!kind)
  {
    throw InvalidParameter(fmt::format("mechanism.kind: unknown mechanism '{}'", j.at("kind").get<std::string>()));
  }
  for (auto const &[key, value] : j.items())
  {
    if (key != "kind" && key != "k" && key != "price" && key != "reserve" && key != "p_conceal" && key != "crypto")
    {
      throw InvalidParameter(fmt::format("mechanism.{}: unknown key", key));
    }
  }
  MechanismConfig cfg;
  cfg.kind   = *kind;
  cfg.crypto = DefaultCrypto(*kind);
  if (j.contains("k"))
  {
    auto const &k = j.at("k");
    if (k.is_string() && k.get<std::string>() == "unlimited")
    {
      cfg.k = kUnlimited;
    }
    else if (k.is_number_integer() && k.get<long long>() >= 1)
    {
      cfg.k = static_cast<std::size_t>(k.get<long long>());
    }
    else
    {
      throw InvalidParameter("mechanism.k: expected an integer >= 1 or \"unlimited\"");
    }
  }
  auto number = [&](char const *key, double &field) {
    if (j.contains(key))
    {
      if (!j.at(key).is_number())
      {
        throw InvalidParameter(fmt::format("mechanism.{}: expected a number", key));
      }
      field = j.at(key).get<double>();
    }
  };
  number("price", cfg.price);
  number("reserve", cfg.reserve);
  number("p_conceal", cfg.conceal_penalty);
  if (j.contains("crypto"))
  {
    auto const crypto = ParseCrypto(j.at("crypto").get<std::string>());
    if (!crypto)
    {
      throw InvalidParameter("mechanism.crypto: expected plaintext, gatekeeper or deferred");
    }
    cfg.crypto = *crypto;
  }
  cfg.Validate();
  return cfg;
}

nlohmann::json MechanismConfig::ToJson() const
{
  nlohmann::json j{{"kind", KindName(kind)}, {"crypto", CryptoName(crypto)}};
  switch (kind)
  {
  case MechanismKind::kEip1559:
    j["price"] = price;
    break;
  case MechanismKind::kCk1pa:
  case MechanismKind::kPk1pa:
  case MechanismKind::kWinnerPaysBid:
    if (k == kUnlimited)
    {
      j["k"] = "unlimited";
    }
    else
    {
      j["k"] = k;
    }
    break;
  case MechanismKind::kBomb:
    j["reserve"] = reserve;
    break;
  case MechanismKind::kDra:
    j["reserve"]   = reserve;
    j["p_conceal"] = conceal_penalty;
    break;
  default:
    break;
  }
  return j;
}

std::string MechanismConfig::Describe() const
{
  switch (kind)
  {
  case MechanismKind::kEip1559:
    return fmt::format("eip1559(p={})", price);
  case MechanismKind::kCk1pa:
  case MechanismKind::kPk1pa:
  case MechanismKind::kWinnerPaysBid:
    return fmt::format("{}(k={})", KindName(kind), k);
  case MechanismKind::kBomb:
    return fmt::format("bomb(r={})", reserve);
  case MechanismKind::kDra:
    return fmt::format("dra(r={}, p_conceal={})", reserve, conceal_penalty);
  default:
    return std::string(KindName(kind));
  }
}

std::string_view KindName(MechanismKind kind)
{
  for (auto const &entry : kKinds)
  {
    if (entry.kind == kind)
    {
      return entry.name;
    }
  }
  return "?";
}

std::optional<MechanismKind> ParseKind(std::string_view name)
{
  for (auto const &entry : kKinds)
  {
    if (entry.name == name)
    {
      return entry.kind;
    }
  }
  return std::nullopt;
}

std::vector<MechanismKind> const &AllKinds()
{
  static std::vector<MechanismKind> const kinds = [] {
    std::vector<MechanismKind> v;
    for (auto const &entry : kKinds)
    {
      v.push_back(entry.kind);
    }
    return v;
  }();
  return kinds;
}

std::string_view CryptoName(CryptoModel model)
{
  switch (model)
  {
  case CryptoModel::kPlaintext:
    return "plaintext";
  case CryptoModel::kGatekeeper:
    return "gatekeeper";
  case CryptoModel::kDeferred:
    return "deferred";
  }
  return "?";
}

std::optional<CryptoModel> ParseCrypto(std::string_view name)
{
  if (name == "plaintext")
  {
    return CryptoModel::kPlaintext;
  }
  if (name == "gatekeeper")
  {
    return CryptoModel::kGatekeeper;
  }
  if (name == "deferred")
  {
    return CryptoModel::kDeferred;
  }
  return std::nullopt;
}

CryptoModel DefaultCrypto(MechanismKind kind)
{
  switch (kind)
  {
  case MechanismKind::kCk1pa:
  case MechanismKind::kWinnerPaysBid:
  case MechanismKind::kPostedCrypto:
  case MechanismKind::kBomb:
    return CryptoModel::kGatekeeper;
  case MechanismKind::kDra:
    return CryptoModel::kDeferred;
  default:
    return CryptoModel::kPlaintext;
  }
}

void Eip1559(double price, std::span<Bid const> bids, Outcome &out)
{
  ResetFor(bids, out);
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    if (bids[i].amount >= price)
    {
      out.included[i] = 1;
      out.payments[i] = price;
      out.burned += price;
    }
  }
}

void KPlusOnePrice(std::size_t k, double reserve, std::span<Bid const> bids, Outcome &out)
{
  ResetFor(bids, out);
  auto const &order = RankScratch(bids);
  std::size_t const count = IncludeTopK(k, reserve, bids, order, out);
  if (count == 0)
  {
    return;
  }
  double const next  = (k != kUnlimited && bids.size() > k) ? bids[order[k]].amount : 0.0;
  double const price = std::max(next, reserve);
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    if (out.included[i])
    {
      out.payments[i] = price;
      out.miner_revenue += price;
    }
  }
}

void WinnerPaysBid(std::size_t k, double reserve, std::span<Bid const> bids, Outcome &out)
{
  ResetFor(bids, out);
  auto const &order = RankScratch(bids);
  IncludeTopK(k, reserve, bids, order, out);
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    if (out.included[i])
    {
      out.payments[i] = bids[i].amount;
      out.miner_revenue += bids[i].amount;
    }
  }
}

void PostedPrice(double reserve, std::span<Bid const> bids, Outcome &out)
{
  ResetFor(bids, out);
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    if (bids[i].amount >= reserve)
    {
      out.included[i] = 1;
      out.payments[i] = reserve;
      out.miner_revenue += reserve;
    }
  }
}

void Bomb(double reserve, std::span<Bid const> bids, Outcome &out)
{
  ResetFor(bids, out);
  if (bids.empty())
  {
    return;
  }
  double top = bids[0].amount;
  for (auto const &b : bids)
  {
    top = std::max(top, b.amount);
  }
  if (top < reserve)
  {
    return;
  }
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    if (bids[i].amount == top)
    {
      out.included[i] = 1;
      out.payments[i] = top;
      out.miner_revenue += top;
    }
  }
}

void Sr2pa(double reserve, std::span<Bid const> bids, Outcome &out)
{
  ResetFor(bids, out);
  if (bids.empty())
  {
    return;
  }
  auto const &order  = RankScratch(bids);
  auto const  winner = order[0];
  if (bids[winner].amount < reserve)
  {
    return;
  }
  double const second  = bids.size() > 1 ? bids[order[1]].amount : 0.0;
  double const payment = std::max(second, reserve);
  out.included[winner] = 1;
  out.payments[winner] = payment;
  out.miner_revenue    = payment <= 1.0 ? payment * payment : 0.0;
  out.burned           = payment - out.miner_revenue;
}

void Dra(double reserve, double conceal_penalty, std::span<DraBid const> bids, Outcome &out)
{
  out.Reset(bids.size());
  std::size_t best   = bids.size();
  std::size_t second = bids.size();
  auto ahead = [&](std::size_t a, std::size_t b) { return b == bids.size() || Ahead(bids[a].bid, bids[b].bid); };
  for (std::size_t i = 0; i < bids.size(); ++i)
  {
    out.ids[i] = bids[i].bid.id;
    if (bids[i].phase == Phase::kConceal)
    {
      out.payments[i] = conceal_penalty;
      out.penalties_collected += conceal_penalty;
      continue;
    }
    if (ahead(i, best))
    {
      second = best;
      best   = i;
    }
    else if (ahead(i, second))
    {
      second = i;
    }
  }
  if (best == bids.size() || bids[best].bid.amount < reserve)
  {
    return;
  }
  double const runner_up = second == bids.size() ? 0.0 : bids[second].bid.amount;
  double const payment   = std::max(runner_up, reserve);
  out.included[best]     = 1;
  out.payments[best]     = payment;
  out.miner_revenue      = payment;
}

#define TFMLAB_OUTCOME_WRAPPER(Name, Params, Args) \
  Outcome Name Params                              \
  {                                                \
    Outcome out;                                   \
    Name Args;                                     \
    return out;                                    \
  }

TFMLAB_OUTCOME_WRAPPER(Eip1559, (double price, std::span<Bid const> bids), (price, bids, out))
TFMLAB_OUTCOME_WRAPPER(KPlusOnePrice, (std::size_t k, double reserve, std::span<Bid const> bids), (k, reserve, bids, out))
TFMLAB_OUTCOME_WRAPPER(WinnerPaysBid, (std::size_t k, double reserve, std::span<Bid const> bids), (k, reserve, bids, out))
TFMLAB_OUTCOME_WRAPPER(PostedPrice, (double reserve, std::span<Bid const> bids), (reserve, bids, out))
TFMLAB_OUTCOME_WRAPPER(Bomb, (double reserve, std::span<Bid const> bids), (reserve, bids, out))
TFMLAB_OUTCOME_WRAPPER(Sr2pa, (double reserve, std::span<Bid const> bids), (reserve, bids, out))
TFMLAB_OUTCOME_WRAPPER(Dra, (double reserve, double conceal_penalty, std::span<DraBid const> bids), (reserve, conceal_penalty, bids, out))

#undef TFMLAB_OUTCOME_WRAPPER

void BuildBlock(MechanismConfig const &cfg, double advice, std::span<Bid const> bids, Outcome &out)
{
  switch (cfg.kind)
  {
  case MechanismKind::kEip1559:
    Eip1559(cfg.price, bids, out);
    return;
  case MechanismKind::kCk1pa:
  case MechanismKind::kPk1pa:
    KPlusOnePrice(cfg.k, advice, bids, out);
    return;
  case MechanismKind::kWinnerPaysBid:
    WinnerPaysBid(cfg.k, advice, bids, out);
    return;
  case MechanismKind::kPostedPlain:
  case MechanismKind::kPostedCrypto:
    PostedPrice(advice, bids, out);
    return;
  case MechanismKind::kBomb:
    Bomb(cfg.reserve, bids, out);
    return;
  case MechanismKind::kSr2pa:
    Sr2pa(advice, bids, out);
    return;
  case MechanismKind::kDra:
  {
    thread_local std::vector<DraBid> revealed;
    revealed.clear();
    for (auto const &b : bids)
    {
      revealed.push_back({b, Phase::kReveal});
    }
    Dra(cfg.reserve, cfg.conceal_penalty, revealed, out);
    return;
  }
  }
}

Outcome BuildBlock(MechanismConfig const &cfg, double advice, std::span<Bid const> bids)
{
  Outcome out;
  BuildBlock(cfg, advice, bids, out);
  return out;
}

std::vector<Bid> MakeBids(std::vector<double> const &amounts)
{
  std::vector<Bid> bids;
  bids.reserve(amounts.size());
  for (std::size_t i = 0; i < amounts.size(); ++i)
  {
    bids.push_back({static_cast<BidId>(i + 1), amounts[i], Origin::kUser});
  }
  return bids;
}

}  // namespace tfmlab
