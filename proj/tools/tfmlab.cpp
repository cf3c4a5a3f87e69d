#include "tfmlab/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char **argv)
{
  CLI::App app{"Transaction fee mechanism lab: scenario runner and property checkers"};
  app.require_subcommand(1);

  tfmlab::RunOptions options;
  std::string        config_path;
  std::string        out_dir = "out";
  std::uint64_t      reps    = 0;
  std::uint64_t      seed    = 0;
  std::size_t        jobs    = 0;
  bool               no_cache = false;

  auto *run = app.add_subcommand("run", "run a scenario or matrix config and write reports");
  run->add_option("config", config_path, "scenario config file")->required();
  run->add_option("--out", out_dir, "output directory");
  auto *reps_opt = run->add_option("--reps", reps, "replications per comparison");
  auto *seed_opt = run->add_option("--seed", seed, "override the config seed");
  auto *jobs_opt = run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--no-cache", no_cache, "ignore and do not write the result cache");

  app.add_subcommand("list", "print the mechanism, strategy, attack and checker vocabulary");

  std::string checker;
  auto       *verify = app.add_subcommand("verify", "run one checker and replay its witness");
  verify->add_option("config", config_path, "scenario config file")->required();
  verify->add_option("--checker", checker, "checker name")->required();
  auto *vreps_opt = verify->add_option("--reps", reps, "replications per comparison");
  auto *vseed_opt = verify->add_option("--seed", seed, "override the config seed");
  auto *vjobs_opt = verify->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (app.got_subcommand("list"))
  {
    std::cout << tfmlab::ListLibrary();
    return 0;
  }

  options.out_dir   = out_dir;
  options.use_cache = !no_cache;
  if (*reps_opt || *vreps_opt)
  {
    options.reps = reps;
  }
  if (*seed_opt || *vseed_opt)
  {
    options.seed = seed;
  }
  if (*jobs_opt || *vjobs_opt)
  {
    options.jobs = jobs;
  }

  try
  {
    if (app.got_subcommand("run"))
    {
      return tfmlab::RunCommand(config_path, options, std::cout, std::cerr);
    }
    return tfmlab::VerifyCommand(config_path, checker, options, std::cout, std::cerr);
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
