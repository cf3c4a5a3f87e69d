#include "tfmlab/checkers.hpp"
#include "tfmlab/config.hpp"
#include "tfmlab/dist.hpp"
#include "tfmlab/engine.hpp"
#include "tfmlab/error.hpp"
#include "tfmlab/interim.hpp"
#include "tfmlab/mech.hpp"
#include "tfmlab/runner.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace tfmlab;

namespace {

// JSON crosses the boundary as text; the Python side wraps it with json.loads
std::string Dump(nlohmann::json const &j)
{
  return j.dump();
}

nlohmann::json Parse(std::string const &text)
{
  return nlohmann::json::parse(text);
}

ScenarioConfig ConfigFrom(std::string const &path_or_text)
{
  auto const trimmed = path_or_text.find_first_not_of(" \t\r\n");
  bool const inline_text =
    trimmed != std::string::npos && (path_or_text.find('\n') != std::string::npos || path_or_text[trimmed] == '{');
  if (inline_text)
  {
    return ScenarioConfig::FromJson(ParseConfigText(path_or_text));
  }
  return LoadScenario(path_or_text);
}

py::dict OutcomeDict(Outcome const &o)
{
  py::dict d;
  d["ids"]                 = o.ids;
  d["included"]            = std::vector<bool>(o.included.begin(), o.included.end());
  d["payments"]            = o.payments;
  d["miner_revenue"]       = o.miner_revenue;
  d["burned"]              = o.burned;
  d["penalties_collected"] = o.penalties_collected;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tfmlab, m)
{
  m.doc() = "Transaction fee mechanism lab: mechanisms, strategies, estimators and property checkers";
  m.attr("__version__") = std::string(kToolVersion);

  // translators run newest first, so the base class goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<OutOfRange>(m, "OutOfRange", PyExc_ValueError);

  py::class_<ValueDistribution>(m, "ValueDistribution")
    .def_static("uniform", &ValueDistribution::Uniform, py::arg("lo"), py::arg("hi"))
    .def_static("exponential", &ValueDistribution::Exponential, py::arg("rate"))
    .def_static("truncated_exponential", &ValueDistribution::TruncatedExponential, py::arg("rate"), py::arg("hi"))
    .def_static("piecewise_linear_cdf", &ValueDistribution::PiecewiseLinearCdf, py::arg("knots"), py::arg("cdf"))
    .def_static("from_json", [](std::string const &text) { return ValueDistribution::FromJson(Parse(text)); })
    .def("to_json", [](ValueDistribution const &d) { return Dump(d.ToJson()); })
    .def("cdf", &ValueDistribution::Cdf)
    .def("pdf", &ValueDistribution::Pdf)
    .def("quantile", &ValueDistribution::Quantile)
    .def("__repr__", &ValueDistribution::Describe);

  m.def("virtual_value", &VirtualValue, py::arg("dist"), py::arg("v"));
  m.def("monopoly_reserve", &MonopolyReserve, py::arg("dist"));
  m.def("inverse_virtual", &InverseVirtual, py::arg("dist"), py::arg("w"));
  m.def(
    "regularity_alpha",
    [](ValueDistribution const &d, std::size_t points) {
      auto const r = CheckRegularity(d, SupportGrid(d, points));
      return py::make_tuple(r.regular, r.alpha_lower_bound);
    },
    py::arg("dist"), py::arg("points") = 401);
  m.def("optimal_revenue_quadrature", &OptimalRevenueQuadrature, py::arg("dist"), py::arg("n"), py::arg("k"),
        py::arg("burn") = 0.0);
  m.attr("UNLIMITED") = kUnlimited;

  m.def(
    "build_block",
    [](std::string const &mechanism_json, double advice, std::vector<double> const &bids) {
      auto const cfg = MechanismConfig::FromJson(Parse(mechanism_json));
      return OutcomeDict(BuildBlock(cfg, advice, MakeBids(bids)));
    },
    py::arg("mechanism"), py::arg("advice"), py::arg("bids"),
    "Run one block-building call. `mechanism` is a JSON table such as '{\"kind\": \"c_k1_pa\", \"k\": 1}'.");

  m.def(
    "load_config", [](std::string const &src) { return CanonicalText(ConfigFrom(src)); }, py::arg("config"),
    "Canonical JSON of a config file path or inline config text.");
  m.def(
    "scenario_hash", [](std::string const &src) { return ScenarioHash(ConfigFrom(src)); }, py::arg("config"));

  m.def(
    "estimate_revenue",
    [](std::string const &src, std::size_t n, std::uint64_t reps, std::uint64_t seed) {
      auto const  cfg = ConfigFrom(src);
      SimEstimate est;
      {
        py::gil_scoped_release release;
        est = EstimateRevenue(cfg.MakeGame(n), cfg.MakeProfile(n), reps, seed);
      }
      return py::make_tuple(est.mean, est.std_err);
    },
    py::arg("config"), py::arg("n"), py::arg("reps"), py::arg("seed"), "Mean miner revenue and its standard error.");

  m.def(
    "run_checker",
    [](std::string const &src, std::string const &name, std::optional<std::uint64_t> reps) {
      auto cfg = ConfigFrom(src);
      if (reps)
      {
        cfg.reps = *reps;
      }
      PropertyVerdict v;
      {
        py::gil_scoped_release release;
        v = RunChecker(name, cfg.MakeContext(DeriveSeed(cfg.seed, ScenarioHash(cfg))));
      }
      v.scenario = cfg.label;
      return Dump(v.ToJson());
    },
    py::arg("config"), py::arg("checker"), py::arg("reps") = py::none(), "Verdict of one checker as JSON text.");

  m.def(
    "run",
    [](std::filesystem::path const &config, std::filesystem::path const &out_dir, std::optional<std::uint64_t> reps,
       std::optional<std::uint64_t> seed, std::optional<std::size_t> jobs, bool use_cache) {
      RunOptions o;
      o.out_dir   = out_dir;
      o.reps      = reps;
      o.seed      = seed;
      o.jobs      = jobs;
      o.use_cache = use_cache;
      std::ostringstream out, err;
      int                code = 0;
      {
        py::gil_scoped_release release;
        code = RunCommand(config, o, out, err);
      }
      return py::make_tuple(code, out.str(), err.str());
    },
    py::arg("config"), py::arg("out_dir"), py::arg("reps") = py::none(), py::arg("seed") = py::none(),
    py::arg("jobs") = py::none(), py::arg("use_cache") = true,
    "Same as the `run` command: returns (exit code, stdout text, log text).");

  m.def("list_library", &ListLibrary);
  m.def("checker_names", [] {
    std::vector<std::string> out;
    for (auto n : CheckerNames())
    {
      out.emplace_back(n);
    }
    return out;
  });
  m.def("set_workers", &SetWorkerCount, py::arg("workers"));
}
