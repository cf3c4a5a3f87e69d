#pragma once

#include "tfmlab/checkers.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tfmlab {

// ---------------------------------------------------------------------------
// Text format: `key = value` lines, `[table]` / `[a.b]` headers, `#` comments.
// Values are strings, numbers, booleans, arrays and inline tables. A document
// starting with `{` is read as JSON instead.

nlohmann::json ParseConfigText(std::string_view text);

// Inverse of ParseConfigText for objects whose top level is a table.
std::string SerializeConfig(nlohmann::json const &doc);

// ---------------------------------------------------------------------------

struct InterimSpec
{
  std::size_t user{0};
  std::size_t points{21};
  double      tol{0.01};
};

struct ConstantRevenueSpec
{
  std::vector<double> conditioning;
};

/**
 * One scenario, or a matrix whose rows are scenarios. Unknown keys are errors.
 */
struct ScenarioConfig
{
  std::string              name;
  std::string              label;  // matrix row label; defaults to name
  std::uint64_t            seed{0};
  std::uint64_t            reps{1'000'000};
  std::vector<std::size_t> n_list;
  std::optional<std::size_t> checker_n;  // n used by checkers; defaults to n_list.front()
  std::vector<std::string> checkers;
  std::vector<std::string> estimates;
  std::size_t              cartel_user{0};
  bool                     allow_multi_bid{false};

  std::optional<MechanismConfig>   mechanism;
  std::optional<ValueDistribution> dist;
  nlohmann::json                   miner;  // as written, before "monopoly" advice is resolved
  nlohmann::json                   users;

  Thresholds          thresholds;
  SearchBudget        budget;
  InterimSpec         interim;
  ConstantRevenueSpec constant_revenue;
  std::map<std::string, std::string> expect;  // checker -> verdict name

  // matrix form
  std::vector<ScenarioConfig> rows;
  std::string                 golden;  // path relative to the config file

  bool IsMatrix() const
  {
    return !rows.empty();
  }
  std::size_t CheckerN() const;

  Game           MakeGame(std::size_t n) const;
  OnChainProfile MakeProfile(std::size_t n) const;
  CheckContext   MakeContext(std::uint64_t effective_seed) const;

  nlohmann::json ToJson() const;
  // base_dir resolves row paths of a matrix
  static ScenarioConfig FromJson(nlohmann::json const &j, std::filesystem::path const &base_dir = {});
};

ScenarioConfig LoadScenario(std::filesystem::path const &path);

// canonical JSON text: sorted keys, defaults filled, rows inlined
std::string CanonicalText(ScenarioConfig const &cfg);

// content hash of the canonical config, 16 hex digits; the golden path is excluded
std::string ScenarioHash(ScenarioConfig const &cfg);

UserStrategy  UserStrategyFromJson(nlohmann::json const &j, Game const &game);
MinerStrategy MinerStrategyFromJson(nlohmann::json const &j, Game const &game);

}  // namespace tfmlab
