#pragma once

#include "tfmlab/config.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace tfmlab {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct RunOptions
{
  std::filesystem::path                out_dir{"out"};
  std::optional<std::uint64_t>         reps;
  std::optional<std::uint64_t>         seed;
  std::optional<std::size_t>           jobs;
  bool                                 use_cache{true};
  std::optional<std::filesystem::path> cache_dir;  // overrides the environment
};

// TFMLAB_CACHE_DIR, else $XDG_CACHE_HOME/tfmlab, else ~/.cache/tfmlab
std::filesystem::path DefaultCacheDir();

// applies --reps/--seed overrides, including to matrix rows
void ApplyOverrides(ScenarioConfig &cfg, RunOptions const &options);

// Runs every checker and estimate of the config. The record is a pure function of
// the canonical config: no timestamps, no paths.
nlohmann::json ExecuteScenario(ScenarioConfig const &cfg, std::ostream *log = nullptr);

// Writes matrix.txt, verdicts.jsonl, revenue_curves.csv, interim_<user>.csv and record.json.
void EmitReports(nlohmann::json const &record, std::filesystem::path const &out_dir);

struct RunOutcome
{
  int            exit_code{0};
  bool           cache_hit{false};
  nlohmann::json record;
};

// Golden comparisons run on every invocation, cached or not.
RunOutcome RunScenario(ScenarioConfig cfg, std::filesystem::path const &config_dir, RunOptions const &options,
                       std::ostream &log);

// CLI entry points; return the process exit code
int RunCommand(std::filesystem::path const &config, RunOptions const &options, std::ostream &out, std::ostream &err);
int VerifyCommand(std::filesystem::path const &config, std::string_view checker, RunOptions const &options,
                  std::ostream &out, std::ostream &err);
std::string ListLibrary();

}  // namespace tfmlab
