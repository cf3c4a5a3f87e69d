#include "tfmlab/interim.hpp"

#include "tfmlab/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

namespace tfmlab {

nlohmann::json InterimRules::ToJson() const
{
  return {{"v", grid}, {"x", x}, {"p", p}, {"se_x", se_x}, {"se_p", se_p}};
}

InterimRules ComputeInterimRules(Game const &game, OnChainProfile const &profile, std::size_t user,
                                 std::vector<double> const &grid, std::uint64_t reps, std::uint64_t seed)
{
  if (user >= game.n)
  {
    throw InvalidParameter(fmt::format("interim user index {} out of range for n={}", user, game.n));
  }
  auto const bound   = profile.Bound(game);
  auto const points  = grid.size();
  auto       moments = RunReplications(reps, 2 * points, seed, "interim", [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(game.n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      for (std::size_t g = 0; g < points; ++g)
      {
        (*values)[user] = grid[g];
        PlayOnChain(game, bound, *values, *ws);
        out[2 * g]     = ws->user_included[user] ? 1.0 : 0.0;
        out[2 * g + 1] = ws->user_payment[user];
      }
    };
  });
  InterimRules rules;
  rules.grid = grid;
  for (std::size_t g = 0; g < points; ++g)
  {
    rules.x.push_back(moments[2 * g].mean);
    rules.se_x.push_back(moments[2 * g].StdErr());
    rules.p.push_back(moments[2 * g + 1].mean);
    rules.se_p.push_back(moments[2 * g + 1].StdErr());
  }
  return rules;
}

nlohmann::json PaymentIdentityReport::ToJson() const
{
  return {{"pass", pass}, {"worst_excess", worst_excess}, {"worst_v", worst_v}, {"residual", residual},
          {"allowance", allowance}};
}

PaymentIdentityReport CheckPaymentIdentity(InterimRules const &rules, double tol)
{
  auto const &v = rules.grid;
  auto const &x = rules.x;
  auto const &p = rules.p;
  auto const  m = v.size();
  if (m < 2 || x.size() != m || p.size() != m || rules.se_x.size() != m || rules.se_p.size() != m)
  {
    throw InvalidParameter("interim rules need at least two consistent grid points");
  }
  for (std::size_t j = 0; j + 1 < m; ++j)
  {
    double const slack = 3.0 * std::hypot(rules.se_x[j], rules.se_x[j + 1]);
    if (x[j + 1] < x[j] - slack - 1e-12)
    {
      throw MonotonicityViolation(fmt::format("interim allocation falls from {} at v={} to {} at v={}", x[j], v[j],
                                              x[j + 1], v[j + 1]));
    }
  }

  PaymentIdentityReport report;
  report.residual.assign(m, 0.0);
  report.allowance.assign(m, tol);
  report.worst_excess = -tol;
  report.worst_v      = v[0];

  double              integral = 0.0;
  double              disc     = 0.0;
  std::vector<double> weight(m, 0.0);  // trapezoid weights of the running integral
  for (std::size_t j = 1; j < m; ++j)
  {
    double const h = v[j] - v[j - 1];
    integral += 0.5 * h * (x[j] + x[j - 1]);
    disc += 0.5 * h * std::abs(x[j] - x[j - 1]);
    weight[j - 1] += 0.5 * h;
    weight[j] += 0.5 * h;

    double var = rules.se_p[j] * rules.se_p[j] + rules.se_p[0] * rules.se_p[0];
    var += std::pow(v[j] * rules.se_x[j], 2) + std::pow(v[0] * rules.se_x[0], 2);
    for (std::size_t q = 0; q <= j; ++q)
    {
      var += std::pow(weight[q] * rules.se_x[q], 2);
    }
    double const predicted = v[j] * x[j] - v[0] * x[0] - integral;
    double const residual  = (p[j] - p[0]) - predicted;
    double const allowance = tol + 3.0 * std::sqrt(var) + disc;
    report.residual[j]     = residual;
    report.allowance[j]    = allowance;
    double const excess    = std::abs(residual) - allowance;
    if (excess > report.worst_excess)
    {
      report.worst_excess = excess;
      report.worst_v      = v[j];
    }
    if (excess > 0.0)
    {
      report.pass = false;
    }
  }
  return report;
}

bool VirtualWelfareReport::Within(double z) const
{
  return std::abs(diff) <= z * std_err + 1e-12;
}

nlohmann::json VirtualWelfareReport::ToJson() const
{
  return {{"lhs", lhs.ToJson()}, {"rhs", rhs.ToJson()}, {"diff", diff}, {"stderr", std_err}};
}

VirtualWelfareReport RevenueEqualsVirtualWelfare(Game const &game, OnChainProfile const &profile, std::uint64_t reps,
                                                 std::uint64_t seed)
{
  auto const bound   = profile.Bound(game);
  auto       moments = RunReplications(reps, 3, seed, "virtual_welfare", [&]() -> ReplicationBody {
    auto ws     = std::make_shared<PlayWorkspace>();
    auto values = std::make_shared<std::vector<double>>(game.n);
    return [&, ws, values](RngStream &stream, std::span<double> out) {
      DrawValues(game.dist, stream, *values);
      PlayOnChain(game, bound, *values, *ws);
      double paid    = 0.0;
      double welfare = 0.0;
      for (std::size_t u = 0; u < game.n; ++u)
      {
        paid += ws->user_payment[u];
        if (ws->user_included[u])
        {
          welfare += VirtualValue(game.dist, (*values)[u]);
        }
      }
      out[0] = paid;
      out[1] = welfare;
      out[2] = paid - welfare;
    };
  });
  VirtualWelfareReport report;
  report.lhs     = SimEstimate::From(moments[0], seed);
  report.rhs     = SimEstimate::From(moments[1], seed);
  report.diff    = moments[2].mean;
  report.std_err = moments[2].StdErr();
  return report;
}

double BenchmarkSample(ValueDistribution const &d, std::span<double const> values, std::size_t k, double burn,
                       std::vector<double> &scratch)
{
  scratch.clear();
  for (double v : values)
  {
    double const w = VirtualValue(d, v) - burn;
    if (w > 0.0)
    {
      scratch.push_back(w);
    }
  }
  if (k < scratch.size())
  {
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end(),
                      std::greater<>());
    scratch.resize(k);
  }
  double total = 0.0;
  for (double w : scratch)
  {
    total += w;
  }
  return total;
}

double OptimalRevenueQuadrature(ValueDistribution const &d, std::size_t n, std::size_t k, double burn)
{
  if (n == 0 || k == 0)
  {
    return 0.0;
  }
  double const top = d.EffectiveHi();
  // (φ - burn)⁺ vanishes below its root
  double start = d.lo();
  if (VirtualValue(d, top) <= burn)
  {
    return 0.0;
  }
  try
  {
    start = InverseVirtual(d, burn);
  }
  catch (OutOfRange const &)
  {
    start = d.lo();
  }
  auto integrate = [&](std::function<double(double)> const &f) {
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, start, top, 15, 1e-12, &error);
  };
  auto excess = [&](double v) { return std::max(0.0, VirtualValue(d, v) - burn); };
  if (k >= n)
  {
    return static_cast<double>(n) * integrate([&](double v) { return excess(v) * d.Pdf(v); });
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= k; ++j)
  {
    // density of the j-th highest of n draws
    double const log_coef = std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(j)) -
                            std::lgamma(static_cast<double>(n - j + 1));
    double const coef = std::exp(log_coef);
    total += integrate([&](double v) {
      double const F = d.Cdf(v);
      return excess(v) * coef * std::pow(F, static_cast<double>(n - j)) *
             std::pow(1.0 - F, static_cast<double>(j - 1)) * d.Pdf(v);
    });
  }
  return total;
}

nlohmann::json BenchmarkReport::ToJson() const
{
  return {{"value", value}, {"stderr", std_err}, {"reps", reps}, {"quadrature", quadrature}};
}

BenchmarkReport OptimalRevenueBenchmarkReport(ValueDistribution const &d, std::size_t n, std::size_t k, double burn,
                                              std::uint64_t reps, std::uint64_t seed)
{
  auto moments = RunReplications(reps, 1, seed, "benchmark", [&]() -> ReplicationBody {
    auto values  = std::make_shared<std::vector<double>>(n);
    auto scratch = std::make_shared<std::vector<double>>();
    return [&, values, scratch](RngStream &stream, std::span<double> out) {
      DrawValues(d, stream, *values);
      out[0] = BenchmarkSample(d, *values, k, burn, *scratch);
    };
  });
  BenchmarkReport report;
  report.value      = moments[0].mean;
  report.std_err    = moments[0].StdErr();
  report.reps       = reps;
  report.quadrature = OptimalRevenueQuadrature(d, n, k, burn);
  return report;
}

double OptimalRevenueBenchmark(ValueDistribution const &d, std::size_t n, std::size_t k, double burn,
                               std::uint64_t reps, std::uint64_t seed)
{
  return OptimalRevenueBenchmarkReport(d, n, k, burn, reps, seed).value;
}

nlohmann::json EquivalenceReport::ToJson() const
{
  return {{"pass", pass}, {"diff", diff}, {"stderr", std_err}};
}

EquivalenceReport CheckRevenueEquivalence(SimEstimate const &a, SimEstimate const &b, double z)
{
  EquivalenceReport report;
  report.diff    = a.mean - b.mean;
  report.std_err = std::hypot(a.std_err, b.std_err);
  report.pass    = std::abs(report.diff) <= z * report.std_err + 1e-12;
  return report;
}

}  // namespace tfmlab
