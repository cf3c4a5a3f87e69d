#pragma once

#include "tfmlab/engine.hpp"
#include "tfmlab/interim.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tfmlab {

struct Thresholds
{
  double z{5.0};
  double abs_eps{1e-4};
  double revenue_abs_eps{1e-3};
  double user_abs_eps{1e-9};

  double Margin(double std_err) const
  {
    return std::max(z * std_err, abs_eps);
  }
  double RevenueMargin(double std_err) const
  {
    return std::max(z * std_err, revenue_abs_eps);
  }
  nlohmann::json ToJson() const;
};

struct SearchBudget
{
  std::size_t   value_points{21};
  std::size_t   bid_points{201};
  std::size_t   reserve_points{41};
  std::size_t   fabricate_max{3};
  std::size_t   fabricate_points{11};
  std::size_t   opp_samples{256};
  std::size_t   dra_grid_points{100};
  std::size_t   contract_points{41};
  std::size_t   confirm_top{3};
  std::uint64_t reps{1'000'000};
  std::uint64_t screen_reps{20'000};
  std::uint64_t collusion_screen_reps{4'000};

  nlohmann::json ToJson() const;
};

enum class Verdict
{
  kNoViolationFound,
  kViolation
};

std::string_view VerdictName(Verdict v);

struct Gain
{
  double mean{0.0};
  double std_err{0.0};
};

struct Witness
{
  std::string    description;
  double         gain{0.0};
  double         std_err{0.0};
  bool           trivial{false};  // definitional failure, nothing to replay
  nlohmann::json detail;
  // re-measures the gain standalone with a fresh seed and replication count
  std::function<Gain(std::uint64_t seed, std::uint64_t reps)> replay;
};

struct PropertyVerdict
{
  std::string              property;
  std::string              scenario;
  Verdict                  verdict{Verdict::kNoViolationFound};
  std::optional<Witness>   witness;
  nlohmann::json           budget;
  std::uint64_t            seed{0};
  std::vector<std::string> notes;
  nlohmann::json           details;

  bool Violation() const
  {
    return verdict == Verdict::kViolation;
  }
  nlohmann::json ToJson() const;
};

struct CheckContext
{
  Game           game;
  OnChainProfile profile;
  Thresholds     thresholds;
  SearchBudget   budget;
  std::uint64_t  seed{0};
  std::size_t    cartel_user{0};
};

// property names used in configs and reports
inline constexpr std::string_view kUserSimplicity     = "user_simplicity";
inline constexpr std::string_view kMinerSimplicity    = "miner_simplicity";
inline constexpr std::string_view kStrongCollusion    = "strong_collusion";
inline constexpr std::string_view kOffChainInfluence  = "off_chain_influence";
inline constexpr std::string_view kWeakCollusion      = "weak_collusion";
inline constexpr std::string_view kTrustlessCollusion = "trustless_collusion";
inline constexpr std::string_view kConstantRevenue    = "constant_revenue";

std::vector<std::string_view> const &CheckerNames();

PropertyVerdict CheckUserSimplicity(CheckContext const &ctx);
PropertyVerdict CheckMinerSimplicity(CheckContext const &ctx);
PropertyVerdict CheckStrongCollusion(CheckContext const &ctx);
PropertyVerdict CheckOffChainInfluence(CheckContext const &ctx);
PropertyVerdict CheckWeakCollusion(CheckContext const &ctx);
PropertyVerdict CheckTrustlessCollusion(CheckContext const &ctx);

using ProfileFamily = std::function<OnChainProfile(std::size_t n)>;

// ctx.game.n and ctx.profile are ignored; the family supplies one profile per n
PropertyVerdict CheckConstantRevenue(CheckContext const &ctx, ProfileFamily const &family,
                                     std::vector<std::size_t> const &n_range, std::vector<double> const &conditioning);

// dispatch by name for the single-profile checkers
PropertyVerdict RunChecker(std::string_view name, CheckContext const &ctx);

// ---------------------------------------------------------------------------
// Property matrix

struct MatrixRow
{
  std::string label;
  bool        off_chain_influence{false};
  bool        user_simple{false};
  bool        miner_simple{false};
};

// row labels in table order
std::vector<std::string> const &Table1Labels();

struct PropertyMatrix
{
  std::vector<MatrixRow> rows;

  std::string Render() const;
};

struct ScenarioVerdicts
{
  std::string                  label;
  std::vector<PropertyVerdict> verdicts;
};

// Throws ScenarioGap if a table row or one of its three verdicts is missing.
PropertyMatrix BuildPropertyMatrix(std::vector<ScenarioVerdicts> const &scenarios);

// ---------------------------------------------------------------------------
// Equilibrium comparison

struct EquilibriumEntry
{
  std::string    label;
  OnChainProfile profile;
};

struct RankingEntry
{
  std::string label;
  SimEstimate revenue;
};

// sorted by expected miner revenue, highest first; all entries share value draws
std::vector<RankingEntry> CompareOnChainEquilibria(Game const &game, std::vector<EquilibriumEntry> const &equilibria,
                                                   std::uint64_t reps, std::uint64_t seed);

}  // namespace tfmlab
