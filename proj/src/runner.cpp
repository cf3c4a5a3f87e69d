#include "tfmlab/runner.hpp"

#include "tfmlab/error.hpp"
#include "tfmlab/rng.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace tfmlab {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(fs::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(fs::path const &path, std::string const &content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  }
  out << content;
  if (!out)
  {
    throw std::runtime_error(fmt::format("write failed for {}", path.string()));
  }
}

// temp file + rename, so concurrent writers of equal records are harmless
void WriteAtomic(fs::path const &path, std::string const &content)
{
  auto const tmp = path.string() + fmt::format(".tmp{}", ::getpid());
  WriteFile(tmp, content);
  fs::rename(tmp, path);
}

std::string Timestamp()
{
  auto const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm    tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t EffectiveSeed(ScenarioConfig const &cfg)
{
  return DeriveSeed(cfg.seed, ScenarioHash(cfg));
}

nlohmann::json VerdictRecord(PropertyVerdict v, ScenarioConfig const &cfg)
{
  v.scenario = cfg.label;
  auto j     = v.ToJson();
  j["n"]     = cfg.CheckerN();
  return j;
}

nlohmann::json ExecuteSingle(ScenarioConfig const &cfg, std::ostream *log)
{
  auto const     seed = EffectiveSeed(cfg);
  nlohmann::json rec;
  rec["name"]  = cfg.name;
  rec["label"] = cfg.label;
  rec["hash"]  = ScenarioHash(cfg);
  rec["seed"]  = seed;

  nlohmann::json verdicts = nlohmann::json::array();
  if (!cfg.checkers.empty())
  {
    auto const ctx = cfg.MakeContext(seed);
    for (auto const &name : cfg.checkers)
    {
      auto const start = std::chrono::steady_clock::now();
      PropertyVerdict v;
      if (name == kConstantRevenue)
      {
        ProfileFamily family = [&cfg](std::size_t n) { return cfg.MakeProfile(n); };
        v = CheckConstantRevenue(ctx, family, cfg.n_list, cfg.constant_revenue.conditioning);
      }
      else
      {
        try
        {
          v = RunChecker(name, ctx);
        }
        catch (BenchmarkUnavailable const &e)
        {
          throw ConfigError(fmt::format("checkers: {} is unavailable here ({})", name, e.what()));
        }
      }
      if (log)
      {
        auto const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        *log << fmt::format("  {:<12} {:<20} {:<18} {:.1f}s\n", cfg.label, name, VerdictName(v.verdict), secs);
      }
      verdicts.push_back(VerdictRecord(std::move(v), cfg));
    }
  }
  rec["verdicts"] = verdicts;

  auto wants = [&](std::string_view e) {
    return std::find(cfg.estimates.begin(), cfg.estimates.end(), e) != cfg.estimates.end();
  };
  if (wants("revenue"))
  {
    nlohmann::json curve = nlohmann::json::array();
    for (auto n : cfg.n_list)
    {
      auto const est = EstimateRevenue(cfg.MakeGame(n), cfg.MakeProfile(n), cfg.reps, seed);
      curve.push_back({{"n", n}, {"mean", est.mean}, {"stderr", est.std_err}, {"reps", cfg.reps}, {"seed", seed}});
    }
    rec["revenue_curve"] = curve;
  }
  if (wants("interim"))
  {
    auto const n     = cfg.CheckerN();
    auto const game  = cfg.MakeGame(n);
    auto const rules = ComputeInterimRules(game, cfg.MakeProfile(n), cfg.interim.user,
                                           SupportGrid(game.dist, cfg.interim.points), cfg.reps, seed);
    nlohmann::json interim = {{"user", cfg.interim.user}, {"n", n}, {"rules", rules.ToJson()}};
    try
    {
      interim["payment_identity"] = CheckPaymentIdentity(rules, cfg.interim.tol).ToJson();
    }
    catch (MonotonicityViolation const &e)
    {
      interim["payment_identity"] = {{"pass", false}, {"error", e.what()}};
    }
    rec["interim"] = interim;
  }
  if (wants("virtual_welfare"))
  {
    auto const n = cfg.CheckerN();
    rec["virtual_welfare"] =
      RevenueEqualsVirtualWelfare(cfg.MakeGame(n), cfg.MakeProfile(n), cfg.reps, seed).ToJson();
  }
  if (wants("benchmark"))
  {
    auto const burn = cfg.mechanism->BurnPerInclusion();
    if (!burn)
    {
      throw ConfigError(fmt::format("estimates: benchmark is unavailable for {}", KindName(cfg.mechanism->kind)));
    }
    nlohmann::json bench = nlohmann::json::array();
    for (auto n : cfg.n_list)
    {
      auto report = OptimalRevenueBenchmarkReport(*cfg.dist, n, cfg.mechanism->Capacity(), *burn, cfg.reps, seed);
      auto j      = report.ToJson();
      j["n"]      = n;
      bench.push_back(j);
    }
    rec["benchmark"] = bench;
  }
  return rec;
}

std::string CsvNumber(double x)
{
  return fmt::format("{:.10f}", x);
}

}  // namespace

fs::path DefaultCacheDir()
{
  if (char const *dir = std::getenv("TFMLAB_CACHE_DIR"); dir && *dir)
  {
    return dir;
  }
  if (char const *xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
  {
    return fs::path(xdg) / "tfmlab";
  }
  if (char const *home = std::getenv("HOME"); home && *home)
  {
    return fs::path(home) / ".cache" / "tfmlab";
  }
  return fs::temp_directory_path() / "tfmlab-cache";
}

void ApplyOverrides(ScenarioConfig &cfg, RunOptions const &options)
{
  if (options.reps)
  {
    if (*options.reps < 2)
    {
      throw ConfigError("--reps: must be >= 2");
    }
    cfg.reps = *options.reps;
  }
  if (options.seed)
  {
    cfg.seed = *options.seed;
  }
  for (auto &row : cfg.rows)
  {
    row.reps = cfg.reps;
    row.seed = cfg.seed;
  }
}

nlohmann::json ExecuteScenario(ScenarioConfig const &cfg, std::ostream *log)
{
  nlohmann::json rec;
  rec["tool_version"] = kToolVersion;
  rec["name"]         = cfg.name;
  rec["hash"]         = ScenarioHash(cfg);
  rec["config"]       = cfg.ToJson();
  rec["config"].erase("golden");
  nlohmann::json scenarios = nlohmann::json::array();
  if (!cfg.IsMatrix())
  {
    scenarios.push_back(ExecuteSingle(cfg, log));
    rec["scenarios"] = scenarios;
    return rec;
  }

  std::vector<ScenarioVerdicts> rows;
  for (auto const &row : cfg.rows)
  {
    auto r = ExecuteSingle(row, log);
    ScenarioVerdicts sv{row.label, {}};
    for (auto const &v : r["verdicts"])
    {
      PropertyVerdict pv;
      pv.property = v["property"];
      pv.verdict  = v["verdict"] == VerdictName(Verdict::kViolation) ? Verdict::kViolation : Verdict::kNoViolationFound;
      sv.verdicts.push_back(std::move(pv));
    }
    rows.push_back(std::move(sv));
    scenarios.push_back(std::move(r));
  }
  rec["scenarios"] = scenarios;
  try
  {
    auto const     matrix = BuildPropertyMatrix(rows);
    nlohmann::json mrows  = nlohmann::json::array();
    for (auto const &r : matrix.rows)
    {
      mrows.push_back({{"label", r.label},
                       {"off_chain_influence", r.off_chain_influence},
                       {"user_simple", r.user_simple},
                       {"miner_simple", r.miner_simple}});
    }
    rec["matrix"] = {{"text", matrix.Render()}, {"rows", mrows}};
  }
  catch (ScenarioGap const &e)
  {
    throw ConfigError(fmt::format("rows: {}", e.what()));
  }
  return rec;
}

void EmitReports(nlohmann::json const &record, fs::path const &out_dir)
{
  fs::create_directories(out_dir);
  if (record.contains("matrix"))
  {
    WriteFile(out_dir / "matrix.txt", record["matrix"]["text"].get<std::string>());
  }

  std::string jsonl;
  std::string curves = "scenario,n,mean,stderr,reps,seed\n";
  bool        any_curve = false;
  for (auto const &s : record["scenarios"])
  {
    for (auto const &v : s["verdicts"])
    {
      jsonl += v.dump() + "\n";
    }
    if (s.contains("revenue_curve"))
    {
      any_curve = true;
      for (auto const &row : s["revenue_curve"])
      {
        curves += fmt::format("{},{},{},{},{},{}\n", s["name"].get<std::string>(), row["n"].get<std::size_t>(),
                              CsvNumber(row["mean"]), CsvNumber(row["stderr"]), row["reps"].get<std::uint64_t>(),
                              row["seed"].get<std::uint64_t>());
      }
    }
    if (s.contains("interim"))
    {
      auto const &rules = s["interim"]["rules"];
      std::string csv   = "v,x,p,se_x,se_p\n";
      for (std::size_t i = 0; i < rules["v"].size(); ++i)
      {
        csv += fmt::format("{},{},{},{},{}\n", CsvNumber(rules["v"][i]), CsvNumber(rules["x"][i]),
                           CsvNumber(rules["p"][i]), CsvNumber(rules["se_x"][i]), CsvNumber(rules["se_p"][i]));
      }
      WriteFile(out_dir / fmt::format("interim_{}.csv", s["interim"]["user"].get<std::size_t>()), csv);
    }
  }
  WriteFile(out_dir / "verdicts.jsonl", jsonl);
  if (any_curve)
  {
    WriteFile(out_dir / "revenue_curves.csv", curves);
  }
  auto stamped         = record;
  stamped["timestamp"] = Timestamp();
  WriteFile(out_dir / "record.json", stamped.dump(2) + "\n");
}

RunOutcome RunScenario(ScenarioConfig cfg, fs::path const &config_dir, RunOptions const &options, std::ostream &log)
{
  ApplyOverrides(cfg, options);
  if (options.jobs)
  {
    SetWorkerCount(*options.jobs);
  }
  RunOutcome outcome;
  auto const hash       = ScenarioHash(cfg);
  auto const cache_dir  = options.cache_dir ? *options.cache_dir : DefaultCacheDir();
  auto const cache_file = cache_dir / (hash + ".json");

  if (options.use_cache && fs::exists(cache_file))
  {
    try
    {
      outcome.record    = nlohmann::json::parse(ReadFile(cache_file));
      outcome.cache_hit = outcome.record.value("hash", "") == hash;
    }
    catch (nlohmann::json::exception const &)
    {
      outcome.cache_hit = false;
    }
  }
  if (outcome.cache_hit)
  {
    log << fmt::format("cache hit {} ({})\n", hash, cache_file.string());
  }
  else
  {
    log << fmt::format("running {} [{}] with {} worker(s)\n", cfg.name, hash, WorkerCount());
    outcome.record = ExecuteScenario(cfg, &log);
    if (options.use_cache)
    {
      fs::create_directories(cache_dir);
      WriteAtomic(cache_file, outcome.record.dump());
    }
  }
  EmitReports(outcome.record, options.out_dir);

  // golden expectations
  if (cfg.IsMatrix() && !cfg.golden.empty())
  {
    auto const golden   = ReadFile(config_dir / cfg.golden);
    auto const rendered = outcome.record["matrix"]["text"].get<std::string>();
    if (golden != rendered)
    {
      log << "matrix does not match golden " << (config_dir / cfg.golden).string() << "\n--- expected\n"
          << golden << "--- got\n"
          << rendered;
      outcome.exit_code = 1;
    }
    else
    {
      log << "matrix matches golden\n";
    }
  }
  std::vector<ScenarioConfig const *> singles;
  if (cfg.IsMatrix())
  {
    for (auto const &r : cfg.rows)
    {
      singles.push_back(&r);
    }
  }
  else
  {
    singles.push_back(&cfg);
  }
  for (std::size_t s = 0; s < singles.size(); ++s)
  {
    for (auto const &[checker, expected] : singles[s]->expect)
    {
      for (auto const &v : outcome.record["scenarios"][s]["verdicts"])
      {
        if (v["property"] == checker && v["verdict"] != expected)
        {
          log << fmt::format("expectation failed: {} {} = {}, expected {}\n", singles[s]->label, checker,
                             v["verdict"].get<std::string>(), expected);
          outcome.exit_code = 1;
        }
      }
    }
  }
  return outcome;
}

int RunCommand(fs::path const &config, RunOptions const &options, std::ostream &out, std::ostream &err)
{
  ScenarioConfig cfg;
  try
  {
    cfg = LoadScenario(config);
    ApplyOverrides(cfg, options);
  }
  catch (ConfigError const &e)
  {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  try
  {
    auto const outcome = RunScenario(cfg, config.parent_path(), options, err);
    if (outcome.record.contains("matrix"))
    {
      out << outcome.record["matrix"]["text"].get<std::string>();
    }
    for (auto const &s : outcome.record["scenarios"])
    {
      for (auto const &v : s["verdicts"])
      {
        out << fmt::format("{:<12} {:<20} {}\n", s["label"].get<std::string>(), v["property"].get<std::string>(),
                           v["verdict"].get<std::string>());
      }
    }
    return outcome.exit_code;
  }
  catch (ConfigError const &e)
  {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
}

int VerifyCommand(fs::path const &config, std::string_view checker, RunOptions const &options, std::ostream &out,
                  std::ostream &err)
{
  ScenarioConfig cfg;
  try
  {
    cfg = LoadScenario(config);
    ApplyOverrides(cfg, options);
    if (std::find(CheckerNames().begin(), CheckerNames().end(), checker) == CheckerNames().end() ||
        checker == kConstantRevenue)
    {
      throw ConfigError(fmt::format("--checker: unknown or unsupported checker '{}'", checker));
    }
  }
  catch (ConfigError const &e)
  {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  if (options.jobs)
  {
    SetWorkerCount(*options.jobs);
  }
  std::vector<ScenarioConfig> singles = cfg.IsMatrix() ? cfg.rows : std::vector<ScenarioConfig>{cfg};
  int                         code    = 0;
  for (auto const &s : singles)
  {
    PropertyVerdict v;
    try
    {
      v = RunChecker(checker, s.MakeContext(EffectiveSeed(s)));
    }
    catch (BenchmarkUnavailable const &e)
    {
      err << "config error: " << e.what() << "\n";
      return 2;
    }
    auto j = VerdictRecord(v, s);
    if (v.witness && v.witness->replay && !v.witness->trivial)
    {
      // fresh seed, 4x the replications
      auto const g  = v.witness->replay(DeriveSeed(EffectiveSeed(s), "verify/replay"), 4 * s.reps);
      j["replay"]   = {{"gain", g.mean}, {"stderr", g.std_err}, {"reproduced", g.mean > 3.0 * g.std_err}};
    }
    out << j.dump() << "\n";
    if (auto it = s.expect.find(std::string(checker)); it != s.expect.end() && it->second != VerdictName(v.verdict))
    {
      err << fmt::format("expectation failed: {} {} = {}, expected {}\n", s.label, checker, VerdictName(v.verdict),
                         it->second);
      code = 1;
    }
  }
  return code;
}

std::string ListLibrary()
{
  std::string out;
  out += "mechanisms:\n";
  out += "  eip1559          params: price\n";
  out += "  c_k1_pa          params: k (gatekeeper crypto, miner advice = reserve)\n";
  out += "  p_k1_pa          params: k (plaintext, miner advice = reserve)\n";
  out += "  wpb              params: k (miner advice = reserve)\n";
  out += "  posted_plain     params: none (miner advice = price)\n";
  out += "  posted_crypto    params: none (miner advice = price)\n";
  out += "  bomb             params: reserve (r)\n";
  out += "  sr2pa            params: none (miner advice = reserve)\n";
  out += "  dra              params: reserve (r), p_conceal\n";
  out += "distributions:\n";
  out += "  uniform lo hi | exponential rate | truncated_exponential rate hi | piecewise_linear_cdf knots cdf\n";
  out += "user strategies:\n";
  out += "  truthful\n";
  out += "  shade_wpb          reserve, below = bid_value | bid_zero\n";
  out += "  threshold          reserve\n";
  out += "  fixed              bid\n";
  out += "  dra_truthful_reveal\n";
  out += "miner strategies:\n";
  out += "  compliant            advice = number | \"monopoly\"\n";
  out += "  censor               lowest = count | ids = [..]\n";
  out += "  fabricate            bids = [..]\n";
  out += "  reserve_at_max_bid\n";
  out += "  p2pa_revenue_reserve k\n";
  out += "  entry_fee_censor     gamma, paid = [..]\n";
  out += "  dra_selective_reveal grid = [..] | points\n";
  out += "  composite            parts = [..]\n";
  out += "off-chain attacks:\n";
  out += "  off_chain_posted_price   eip1559: price at the inverse virtual value of the base fee\n";
  out += "  entry_fee                eip1559: fee paid to the miner on top of the base fee\n";
  out += "  off_chain_second_price   sr2pa: second price with the monopoly reserve\n";
  out += "  steer_threshold          bomb: users steered to the posted-price equilibrium\n";
  out += "checkers:\n";
  for (auto const &c : CheckerNames())
  {
    out += fmt::format("  {}\n", c);
  }
  out += "estimates:\n";
  out += "  revenue | interim | virtual_welfare | benchmark\n";
  return out;
}

}  // namespace tfmlab
