// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: tfmlab_acceptance [criterion ...]

#include "oracles.hpp"

#include "tfmlab/checkers.hpp"
#include "tfmlab/config.hpp"
#include "tfmlab/engine.hpp"
#include "tfmlab/interim.hpp"
#include "tfmlab/runner.hpp"

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace tfmlab;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kReps = 1'000'000;

fs::path Scenario(std::string const &rel)
{
  return fs::path(TFMLAB_SOURCE_DIR) / "scenarios" / rel;
}

std::string Slurp(fs::path const &p)
{
  std::ifstream     in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path Scratch(std::string const &name)
{
  auto const dir = fs::temp_directory_path() / ("tfmlab_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// collects sub-checks of one criterion
class Report
{
public:
  void Check(bool ok, std::string const &what)
  {
    ok_ = ok_ && ok;
    lines_.push_back(fmt::format("    [{}] {}", ok ? "ok" : "no", what));
  }
  bool ok() const
  {
    return ok_;
  }
  std::vector<std::string> const &lines() const
  {
    return lines_;
  }

private:
  bool                     ok_{true};
  std::vector<std::string> lines_;
};

std::string Pm(double mean, double se)
{
  return fmt::format("{:.6f} ± {:.6f}", mean, se);
}

bool Within3(double x, double target, double se)
{
  return std::abs(x - target) <= 3.0 * se;
}

Game Uniform(MechanismKind kind, std::size_t n, double price = 0.0)
{
  MechanismConfig m;
  m.kind   = kind;
  m.k      = 1;
  m.price  = price;
  m.crypto = DefaultCrypto(kind);
  return {m, ValueDistribution::Uniform(0.0, 1.0), n};
}

OnChainProfile Profile(double reserve, UserStrategy user, std::size_t n)
{
  return OnChainProfile::Symmetric(MinerStrategy::Compliant(reserve), std::move(user), n);
}

// ---------------------------------------------------------------------------

void MyersonPrimitives(Report &r)
{
  auto const u   = ValueDistribution::Uniform(0.0, 1.0);
  auto const res = MonopolyReserve(u);
  auto const inv = InverseVirtual(u, 0.3);
  r.Check(std::abs(res - 0.5) <= 1e-9, fmt::format("monopoly reserve U[0,1] = {:.12f}", res));
  r.Check(std::abs(inv - 0.65) <= 1e-9, fmt::format("inverse virtual U[0,1] at 0.3 = {:.12f}", inv));
  auto const e     = ValueDistribution::Exponential(1.0);
  auto const alpha = CheckRegularity(e, SupportGrid(e, 401)).alpha_lower_bound;
  r.Check(std::abs(alpha - 1.0) <= 1e-3, fmt::format("exponential regularity alpha = {:.6f}", alpha));
}

void RevenueOptimum(Report &r)
{
  auto const game = Uniform(MechanismKind::kCk1pa, 2);
  auto const est  = EstimateRevenue(game, Profile(0.5, UserStrategy::Truthful(), 2), kReps, 0xC2);
  r.Check(Within3(est.mean, oracle::kC2paRevenue, est.std_err),
          fmt::format("C2PA revenue {} vs {:.6f}", Pm(est.mean, est.std_err), oracle::kC2paRevenue));
  auto const bench = OptimalRevenueBenchmark(game.dist, 2, 1, 0.0);
  r.Check(std::abs(est.mean - bench) <= 1e-3, fmt::format("optimal benchmark {:.6f}, |diff| <= 1e-3", bench));
}

void RevenueEquivalence(Report &r)
{
  std::uint64_t seed = 0xE0;
  for (double reserve : {0.0, 0.5})
  {
    for (std::size_t n : {2, 3})
    {
      auto const spa = EstimateRevenue(Uniform(MechanismKind::kCk1pa, n), Profile(reserve, UserStrategy::Truthful(), n),
                                       kReps, ++seed);
      auto const wpb = EstimateRevenue(Uniform(MechanismKind::kWinnerPaysBid, n),
                                       Profile(reserve, UserStrategy::ShadeWpb(reserve, BelowReserve::kBidZero), n),
                                       kReps, ++seed);
      auto const eq = CheckRevenueEquivalence(spa, wpb, 3.0);
      r.Check(eq.pass, fmt::format("r={} n={}: spa {} wpb {} diff {:.6f}", reserve, n, Pm(spa.mean, spa.std_err),
                                   Pm(wpb.mean, wpb.std_err), eq.diff));
    }
  }
  // mismatched reserves must be told apart
  auto const spa = EstimateRevenue(Uniform(MechanismKind::kCk1pa, 2), Profile(0.5, UserStrategy::Truthful(), 2), kReps,
                                   ++seed);
  auto const wpb = EstimateRevenue(Uniform(MechanismKind::kWinnerPaysBid, 2),
                                   Profile(0.0, UserStrategy::ShadeWpb(0.0, BelowReserve::kBidZero), 2), kReps, ++seed);
  auto const eq  = CheckRevenueEquivalence(spa, wpb, 3.0);
  r.Check(!eq.pass, fmt::format("negative control spa r=0.5 vs wpb r=0 rejected, diff {:.6f}", eq.diff));
}

void PaymentIdentity(Report &r)
{
  auto const game  = Uniform(MechanismKind::kCk1pa, 2);
  auto const rules = ComputeInterimRules(game, Profile(0.5, UserStrategy::Truthful(), 2), 0, SupportGrid(game.dist, 21),
                                         kReps, 0x1D);
  auto const rep   = CheckPaymentIdentity(rules, 0.01);
  r.Check(rep.pass, fmt::format("21-point grid, worst excess {:.6f} at v={:.3f}", rep.worst_excess, rep.worst_v));
}

void VirtualWelfare(Report &r)
{
  auto const eip = RevenueEqualsVirtualWelfare(Uniform(MechanismKind::kEip1559, 3, 0.4),
                                               Profile(0.0, UserStrategy::Truthful(), 3), kReps, 0x5A);
  r.Check(Within3(eip.lhs.mean, oracle::kEipRevenueP04N3, eip.lhs.std_err) &&
            Within3(eip.rhs.mean, oracle::kEipRevenueP04N3, eip.rhs.std_err),
          fmt::format("EIP-1559 p=0.4 n=3: payments {} virtual welfare {} vs 0.72", Pm(eip.lhs.mean, eip.lhs.std_err),
                      Pm(eip.rhs.mean, eip.rhs.std_err)));
  auto const spa = RevenueEqualsVirtualWelfare(Uniform(MechanismKind::kCk1pa, 2),
                                               Profile(0.5, UserStrategy::Truthful(), 2), kReps, 0x5B);
  r.Check(Within3(spa.lhs.mean, oracle::kC2paRevenue, spa.lhs.std_err) &&
            Within3(spa.rhs.mean, oracle::kC2paRevenue, spa.rhs.std_err),
          fmt::format("C2PA n=2: payments {} virtual welfare {} vs 5/12", Pm(spa.lhs.mean, spa.lhs.std_err),
                      Pm(spa.rhs.mean, spa.rhs.std_err)));
}

void EipSuite(Report &r)
{
  auto cfg     = LoadScenario(Scenario("eip1559_curve.cfg"));
  cfg.checkers = {"constant_revenue", "user_simplicity", "strong_collusion", "off_chain_influence"};
  cfg.reps     = kReps;
  auto const out = Scratch("eip");
  auto const rec = ExecuteScenario(cfg);
  EmitReports(rec, out);

  std::istringstream csv(Slurp(out / "revenue_curves.csv"));
  std::string        line;
  std::getline(csv, line);
  std::size_t rows = 0;
  bool        zero = true;
  while (std::getline(csv, line))
  {
    std::vector<std::string> cells;
    std::stringstream        ls(line);
    for (std::string c; std::getline(ls, c, ',');)
    {
      cells.push_back(c);
    }
    zero = zero && cells.size() == 6 && std::stoul(cells[1]) == rows && std::stod(cells[2]) == 0.0;
    ++rows;
  }
  r.Check(rows == 9 && zero, fmt::format("revenue curve n=0..8: {} rows, all means exactly 0", rows));

  std::map<std::string, nlohmann::json> verdicts;
  for (auto const &v : rec["scenarios"][0]["verdicts"])
  {
    verdicts[v["property"]] = v;
  }
  for (auto name : {"constant_revenue", "user_simplicity", "strong_collusion"})
  {
    r.Check(verdicts[name]["verdict"] == "NO_VIOLATION_FOUND",
            fmt::format("{} = {}", name, verdicts[name]["verdict"].get<std::string>()));
  }
  auto const &oc = verdicts["off_chain_influence"];
  r.Check(oc["verdict"] == "VIOLATION", "off_chain_influence = VIOLATION");
  if (oc["verdict"] == "VIOLATION")
  {
    auto const &w      = oc["witness"];
    double const gain  = w["gain"];
    double const se    = w["stderr"];
    double const price = w["detail"]["attack"]["param"];
    r.Check(w["detail"]["attack"]["kind"] == "off_chain_posted_price" && std::abs(price - 0.65) <= 1e-9,
            fmt::format("witness is the posted price at {:.6f}", price));
    r.Check(gain >= 4 * oracle::kEipPostedPerUser - 3.0 * se,
            fmt::format("witness gain {} >= 0.49 - 3 SE", Pm(gain, se)));
  }
}

// paired per-draw difference of two profiles on the same value draws
Gain PairedGain(Game const &game, std::function<void(RngStream &, std::vector<double> &)> draw,
                std::function<double(PlayWorkspace const &)> score, OnChainProfile const &base,
                OnChainProfile const &deviation, std::uint64_t seed)
{
  auto const m = RunReplications(kReps, 1, seed, "acceptance/paired", [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(game.n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      draw(stream, *values);
      PlayOnChain(game, base, *values, *ws);
      double const before = score(*ws);
      PlayOnChain(game, deviation, *values, *ws);
      out[0] = score(*ws) - before;
    };
  })[0];
  return {m.mean, m.StdErr()};
}

void AttackWitnesses(Report &r)
{
  {
    auto const game = Uniform(MechanismKind::kPk1pa, 2);
    auto const base = Profile(0.5, UserStrategy::Truthful(), 2);
    auto const dev  = OnChainProfile::Symmetric(MinerStrategy::ReserveAtMaxBid(), UserStrategy::Truthful(), 2);
    auto const g    = PairedGain(
      game, [&](RngStream &s, std::vector<double> &v) { DrawValues(game.dist, s, v); },
      [](PlayWorkspace const &ws) { return ws.miner_utility; }, base, dev, 0x7A);
    r.Check(Within3(g.mean, oracle::kP2paMaxBidGain, g.std_err),
            fmt::format("(a) P2PA reserve at max bid gain {} vs {:.6f}", Pm(g.mean, g.std_err), oracle::kP2paMaxBidGain));
  }
  {
    auto const game = Uniform(MechanismKind::kCk1pa, 2);
    auto const base = Profile(0.5, UserStrategy::Truthful(), 2);
    OnChainProfile shill{MinerStrategy::Compliant(0.5), {UserStrategy::Fixed(InverseVirtual(game.dist, 0.6)),
                                                         UserStrategy::Truthful()}};
    auto const g = PairedGain(
      game,
      [&](RngStream &s, std::vector<double> &v) {
        v[0] = 0.6;
        v[1] = game.dist.Sample(s);
      },
      [](PlayWorkspace const &ws) { return ws.miner_utility + ws.user_utility[0]; }, base, shill, 0x7B);
    r.Check(Within3(g.mean, oracle::kCollusionShill - oracle::kCollusionBaseline, g.std_err),
            fmt::format("(b) C2PA shill bid 0.8 at v=0.6, cartel gain {} vs 0.04", Pm(g.mean, g.std_err)));
  }
  {
    auto cfg = LoadScenario(Scenario("table1/sr2pa_2pa.cfg"));
    auto ctx = cfg.MakeContext(DeriveSeed(cfg.seed, ScenarioHash(cfg)));
    auto v   = CheckOffChainInfluence(ctx);
    bool ok  = v.Violation() && v.witness && v.witness->detail["attack"]["kind"] == "off_chain_second_price" &&
              v.witness->gain > 3.0 * v.witness->std_err;
    r.Check(ok, v.witness ? fmt::format("(c) SR2PA off-chain second price gain {}",
                                        Pm(v.witness->gain, v.witness->std_err))
                          : "(c) SR2PA off-chain second price: no witness");
  }
  for (auto const &[file, expect_violation] : {std::pair{"dra_p0.cfg", true}, std::pair{"dra_p2.cfg", false}})
  {
    auto       cfg = LoadScenario(Scenario(file));
    auto const v   = CheckMinerSimplicity(cfg.MakeContext(DeriveSeed(cfg.seed, ScenarioHash(cfg))));
    r.Check(v.Violation() == expect_violation,
            fmt::format("(d) DRA {} selective reveal: {}{}", file, VerdictName(v.verdict),
                        v.witness ? fmt::format(", gain {}", Pm(v.witness->gain, v.witness->std_err)) : ""));
  }
}

// criteria 8 to 10 share the matrix runs
struct MatrixRun
{
  int            exit_code{-1};
  double         seconds{0.0};
  nlohmann::json record;
  std::string    verdicts;
  std::string    matrix;
};

MatrixRun RunMatrix(std::size_t jobs)
{
  auto const out = Scratch(fmt::format("matrix_{}", jobs));
  RunOptions opts;
  opts.out_dir   = out;
  opts.use_cache = false;
  opts.jobs      = jobs;
  std::ostringstream log;
  auto const         start = std::chrono::steady_clock::now();
  auto const         path  = Scenario("table1.cfg");
  auto               o     = RunScenario(LoadScenario(path), path.parent_path(), opts, log);
  MatrixRun          run;
  run.seconds   = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  run.exit_code = o.exit_code;
  run.record    = std::move(o.record);
  run.verdicts  = Slurp(out / "verdicts.jsonl");
  run.matrix    = Slurp(out / "matrix.txt");
  SetWorkerCount(1);
  return run;
}

MatrixRun const &SerialMatrix()
{
  static MatrixRun const run = RunMatrix(1);
  return run;
}

void MatrixGolden(Report &r)
{
  auto const &run    = SerialMatrix();
  auto const  golden = Slurp(fs::path(TFMLAB_SOURCE_DIR) / "golden" / "table1_matrix.txt");
  r.Check(run.exit_code == 0, fmt::format("run exit code {}", run.exit_code));
  r.Check(run.matrix == golden, "matrix.txt equals the golden file (24 cells)");
  r.Check(run.seconds <= 600.0, fmt::format("runtime {:.1f} s at {} reps per comparison", run.seconds, kReps));
}

void Impossibility(Report &r)
{
  auto const &run = SerialMatrix();
  std::size_t rows = 0;
  for (auto const &s : run.record["scenarios"])
  {
    std::set<std::string> passed;
    for (auto const &v : s["verdicts"])
    {
      if (v["verdict"] == "NO_VIOLATION_FOUND")
      {
        passed.insert(v["property"].get<std::string>());
      }
    }
    bool const all = passed.count("user_simplicity") && passed.count("miner_simplicity") &&
                     passed.count("off_chain_influence") && passed.count("strong_collusion");
    r.Check(!all, fmt::format("{} passes {} of the 4 properties", s["label"].get<std::string>(), passed.size()));
    ++rows;
  }
  r.Check(rows == 8, fmt::format("{} rows checked", rows));
}

void Determinism(Report &r)
{
  auto const &serial   = SerialMatrix();
  auto const  parallel = RunMatrix(8);
  r.Check(!serial.verdicts.empty() && serial.verdicts == parallel.verdicts,
          fmt::format("verdicts.jsonl byte-identical for 1 and 8 workers ({} bytes)", serial.verdicts.size()));
  r.Check(serial.matrix == parallel.matrix, "matrix.txt identical");
}

struct Criterion
{
  int                           id;
  char const                   *name;
  std::function<void(Report &)> run;
};

}  // namespace

int main(int argc, char **argv)
{
  std::vector<Criterion> const criteria{
    {1, "Myerson primitives", MyersonPrimitives},
    {2, "revenue optimum of C2PA", RevenueOptimum},
    {3, "revenue equivalence SPA vs WPB", RevenueEquivalence},
    {4, "payment identity", PaymentIdentity},
    {5, "revenue equals virtual welfare", VirtualWelfare},
    {6, "EIP-1559 suite", EipSuite},
    {7, "attack witnesses", AttackWitnesses},
    {8, "property matrix golden", MatrixGolden},
    {9, "impossibility over the matrix", Impossibility},
    {10, "determinism across worker counts", Determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i)
  {
    only.insert(std::stoi(argv[i]));
  }

  SetWorkerCount(1);
  int failures = 0;
  for (auto const &c : criteria)
  {
    if (!only.empty() && !only.count(c.id))
    {
      continue;
    }
    Report     report;
    auto const start = std::chrono::steady_clock::now();
    try
    {
      c.run(report);
    }
    catch (std::exception const &e)
    {
      report.Check(false, fmt::format("exception: {}", e.what()));
    }
    auto const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << fmt::format("{} criterion {:>2}: {} ({:.1f} s)\n", report.ok() ? "PASS" : "FAIL", c.id, c.name, secs);
    for (auto const &line : report.lines())
    {
      std::cout << line << "\n";
    }
    std::cout.flush();
    failures += report.ok() ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
