#include "tfmlab/dist.hpp"

#include "tfmlab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace tfmlab {
namespace {

constexpr int    kBisectionIterations = 200;
constexpr double kBisectionTolerance  = 1e-12;
constexpr double kRootTolerance       = 1e-9;

double RequireNumber(nlohmann::json const &j, char const *key)
{
  if (!j.contains(key) || !j.at(key).is_number())
  {
    throw InvalidParameter(fmt::format("distribution: missing numeric parameter '{}'", key));
  }
  return j.at(key).get<double>();
}

std::size_t Segment(std::vector<double> const &knots, double v)
{
  // right-continuous: segment j covers [knots[j], knots[j+1]), the last one is closed
  auto it = std::upper_bound(knots.begin(), knots.end(), v);
  auto j  = static_cast<std::size_t>(std::distance(knots.begin(), it));
  if (j == 0)
  {
    return 0;
  }
  return std::min(j - 1, knots.size() - 2);
}

}  // namespace

ValueDistribution ValueDistribution::Uniform(double lo, double hi)
{
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
  {
    throw InvalidParameter(fmt::format("uniform: need finite lo < hi, got [{}, {}]", lo, hi));
  }
  ValueDistribution d;
  d.kind_ = DistributionKind::kUniform;
  d.lo_   = lo;
  d.hi_   = hi;
  return d;
}

ValueDistribution ValueDistribution::Exponential(double rate)
{
  if (!(rate > 0.0) || !std::isfinite(rate))
  {
    throw InvalidParameter(fmt::format("exponential: rate must be > 0, got {}", rate));
  }
  ValueDistribution d;
  d.kind_ = DistributionKind::kExponential;
  d.lo_   = 0.0;
  d.hi_   = std::numeric_limits<double>::infinity();
  d.rate_ = rate;
  return d;
}

ValueDistribution ValueDistribution::TruncatedExponential(double rate, double hi)
{
  if (!(rate > 0.0) || !std::isfinite(rate))
  {
    throw InvalidParameter(fmt::format("truncated_exponential: rate must be > 0, got {}", rate));
  }
  if (!(hi > 0.0) || !std::isfinite(hi))
  {
    throw InvalidParameter(fmt::format("truncated_exponential: hi must be finite and > 0, got {}", hi));
  }
  ValueDistribution d;
  d.kind_ = DistributionKind::kTruncatedExponential;
  d.lo_   = 0.0;
  d.hi_   = hi;
  d.rate_ = rate;
  d.mass_ = -std::expm1(-rate * hi);
  return d;
}

ValueDistribution ValueDistribution::PiecewiseLinearCdf(std::vector<double> knots, std::vector<double> cdf)
{
  if (knots.size() < 2 || knots.size() != cdf.size())
  {
    throw InvalidParameter("piecewise_linear_cdf: need >= 2 knots and one cdf value per knot");
  }
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
  {
    if (!(knots[i] < knots[i + 1]))
    {
      throw InvalidParameter("piecewise_linear_cdf: knots must be strictly increasing");
    }
    if (cdf[i] > cdf[i + 1])
    {
      throw InvalidParameter("piecewise_linear_cdf: cdf values must be non-decreasing");
    }
  }
  if (cdf.front() != 0.0 || cdf.back() != 1.0)
  {
    throw InvalidParameter("piecewise_linear_cdf: cdf must start at 0 and end at 1");
  }
  ValueDistribution d;
  d.kind_  = DistributionKind::kPiecewiseLinearCdf;
  d.lo_    = knots.front();
  d.hi_    = knots.back();
  d.knots_ = std::move(knots);
  d.cdf_   = std::move(cdf);
  return d;
}

ValueDistribution ValueDistribution::FromJson(nlohmann::json const &j)
{
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
  {
    throw InvalidParameter("distribution: expected a table with a string 'kind'");
  }
  auto const kind = j.at("kind").get<std::string>();
  for (auto const &[key, value] : j.items())
  {
    bool const known = key == "kind" || key == "lo" || key == "hi" || key == "rate" || key == "knots" || key == "cdf";
    if (!known)
    {
      throw InvalidParameter(fmt::format("{}: unknown key", key));
    }
  }
  if (kind == "uniform")
  {
    return Uniform(RequireNumber(j, "lo"), RequireNumber(j, "hi"));
  }
  if (kind == "exponential")
  {
    return Exponential(RequireNumber(j, "rate"));
  }
  if (kind == "truncated_exponential")
  {
    return TruncatedExponential(RequireNumber(j, "rate"), RequireNumber(j, "hi"));
  }
  if (kind == "piecewise_linear_cdf")
  {
    if (!j.contains("knots") || !j.contains("cdf"))
    {
      throw InvalidParameter("piecewise_linear_cdf: needs 'knots' and 'cdf'");
    }
    return PiecewiseLinearCdf(j.at("knots").get<std::vector<double>>(),
                              j.at("cdf").get<std::vector<double>>());
  }
  throw InvalidParameter(fmt::format("distribution: unknown kind '{}'", kind));
}

nlohmann::json ValueDistribution::ToJson() const
{
  switch (kind_)
  {
  case DistributionKind::kUniform:
    return {{"kind", "uniform"}, {"lo", lo_}, {"hi", hi_}};
  case DistributionKind::kExponential:
    return {{"kind", "exponential"}, {"rate", rate_}};
  case DistributionKind::kTruncatedExponential:
    return {{"kind", "truncated_exponential"}, {"rate", rate_}, {"hi", hi_}};
  case DistributionKind::kPiecewiseLinearCdf:
    return {{"kind", "piecewise_linear_cdf"}, {"knots", knots_}, {"cdf", cdf_}};
  }
  return {};
}

std::string ValueDistribution::Describe() const
{
  switch (kind_)
  {
  case DistributionKind::kUniform:
    return fmt::format("U[{},{}]", lo_, hi_);
  case DistributionKind::kExponential:
    return fmt::format("Exp({})", rate_);
  case DistributionKind::kTruncatedExponential:
    return fmt::format("TruncExp({}; 0..{})", rate_, hi_);
  case DistributionKind::kPiecewiseLinearCdf:
    return fmt::format("PiecewiseCdf({} knots)", knots_.size());
  }
  return "?";
}

double ValueDistribution::EffectiveHi() const
{
  return bounded() ? hi_ : Quantile(1.0 - kTailMass);
}

double ValueDistribution::Cdf(double v) const
{
  if (v <= lo_)
  {
    return 0.0;
  }
  if (v >= hi_)
  {
    return 1.0;
  }
  switch (kind_)
  {
  case DistributionKind::kUniform:
    return (v - lo_) / (hi_ - lo_);
  case DistributionKind::kExponential:
    return -std::expm1(-rate_ * v);
  case DistributionKind::kTruncatedExponential:
    return -std::expm1(-rate_ * v) / mass_;
  case DistributionKind::kPiecewiseLinearCdf:
  {
    auto const j = Segment(knots_, v);
    auto const t = (v - knots_[j]) / (knots_[j + 1] - knots_[j]);
    return cdf_[j] + t * (cdf_[j + 1] - cdf_[j]);
  }
  }
  return 0.0;
}

double ValueDistribution::Pdf(double v) const
{
  if (v < lo_ || v > hi_)
  {
    return 0.0;
  }
  switch (kind_)
  {
  case DistributionKind::kUniform:
    return 1.0 / (hi_ - lo_);
  case DistributionKind::kExponential:
    return rate_ * std::exp(-rate_ * v);
  case DistributionKind::kTruncatedExponential:
    return rate_ * std::exp(-rate_ * v) / mass_;
  case DistributionKind::kPiecewiseLinearCdf:
  {
    auto const j = Segment(knots_, v);
    return (cdf_[j + 1] - cdf_[j]) / (knots_[j + 1] - knots_[j]);
  }
  }
  return 0.0;
}

double ValueDistribution::Quantile(double u) const
{
  if (u <= 0.0)
  {
    return lo_;
  }
  if (u >= 1.0)
  {
    return hi_;
  }
  switch (kind_)
  {
  case DistributionKind::kUniform:
    return lo_ + u * (hi_ - lo_);
  case DistributionKind::kExponential:
    return -std::log1p(-u) / rate_;
  case DistributionKind::kTruncatedExponential:
    return std::min(hi_, -std::log1p(-u * mass_) / rate_);
  case DistributionKind::kPiecewiseLinearCdf:
  {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    auto j  = static_cast<std::size_t>(std::distance(cdf_.begin(), it)) - 1;
    j       = std::min(j, knots_.size() - 2);
    auto const width = cdf_[j + 1] - cdf_[j];
    if (width <= 0.0)
    {
      return knots_[j];
    }
    return knots_[j] + (u - cdf_[j]) / width * (knots_[j + 1] - knots_[j]);
  }
  }
  return lo_;
}

double VirtualValue(ValueDistribution const &d, double v)
{
  switch (d.kind())
  {
  case DistributionKind::kExponential:
    return v - 1.0 / d.rate();
  case DistributionKind::kTruncatedExponential:
  {
    auto const tail = std::max(0.0, d.hi() - std::clamp(v, d.lo(), d.hi()));
    return v + std::expm1(-d.rate() * tail) / d.rate();
  }
  default:
    break;
  }
  auto const f = d.Pdf(std::clamp(v, d.lo(), d.hi()));
  if (!(f > 0.0))
  {
    throw ZeroDensity(fmt::format("virtual value: zero density at v={}", v));
  }
  return v - (1.0 - d.Cdf(v)) / f;
}

ReserveResult MonopolyReserveOrFallback(ValueDistribution const &d)
{
  double a = d.lo();
  double b = d.EffectiveHi();
  if (VirtualValue(d, a) > 0.0)
  {
    return {a, true};
  }
  if (VirtualValue(d, b) < 0.0)
  {
    return {b, true};
  }
  // bisect to adjacent doubles so boundary comparisons against the reserve are exact
  for (int i = 0; i < kBisectionIterations; ++i)
  {
    double const mid = 0.5 * (a + b);
    if (mid <= a || mid >= b)
    {
      break;
    }
    if (VirtualValue(d, mid) <= 0.0)
    {
      a = mid;
    }
    else
    {
      b = mid;
    }
  }
  double const r = std::abs(VirtualValue(d, a)) <= std::abs(VirtualValue(d, b)) ? a : b;
  if (std::abs(VirtualValue(d, r)) <= kRootTolerance)
  {
    return {r, false};
  }
  // phi jumps over zero: a is the last point with phi <= 0
  return {a, true};
}

double MonopolyReserve(ValueDistribution const &d)
{
  auto const result = MonopolyReserveOrFallback(d);
  if (result.no_root)
  {
    throw NoRoot(fmt::format("monopoly reserve: virtual value of {} has no root; fallback {}",
                             d.Describe(), result.value),
                 result.value);
  }
  return result.value;
}

double InverseVirtual(ValueDistribution const &d, double w)
{
  if (d.kind() == DistributionKind::kExponential)
  {
    double const v = w - VirtualValue(d, 0.0);
    if (v < 0.0)
    {
      throw OutOfRange(fmt::format("inverse virtual: {} below phi(lo)", w));
    }
    return v;
  }
  double a  = d.lo();
  double b  = d.EffectiveHi();
  double fa = VirtualValue(d, a);
  double fb = VirtualValue(d, b);
  if (w < fa - kBisectionTolerance || w > fb + kBisectionTolerance)
  {
    throw OutOfRange(fmt::format("inverse virtual: {} outside [{}, {}]", w, fa, fb));
  }
  for (int i = 0; i < kBisectionIterations; ++i)
  {
    double const mid = 0.5 * (a + b);
    if (mid <= a || mid >= b)
    {
      break;
    }
    if (VirtualValue(d, mid) < w)
    {
      a = mid;
    }
    else
    {
      b = mid;
    }
  }
  return std::abs(VirtualValue(d, a) - w) <= std::abs(VirtualValue(d, b) - w) ? a : b;
}

RegularityReport CheckRegularity(ValueDistribution const &d, std::vector<double> const &grid)
{
  std::vector<double> points;
  for (double v : grid)
  {
    if (v > d.lo() && v < d.hi())
    {
      points.push_back(v);
    }
  }
  RegularityReport report{true, std::numeric_limits<double>::infinity()};
  if (points.size() < 2)
  {
    report.alpha_lower_bound = 0.0;
    return report;
  }
  double prev = VirtualValue(d, points[0]);
  for (std::size_t i = 1; i < points.size(); ++i)
  {
    double const cur = VirtualValue(d, points[i]);
    if (cur - prev < -1e-9)
    {
      report.regular = false;
    }
    report.alpha_lower_bound = std::min(report.alpha_lower_bound, (cur - prev) / (points[i] - points[i - 1]));
    prev = cur;
  }
  report.alpha_lower_bound = std::max(0.0, report.alpha_lower_bound);
  return report;
}

std::vector<double> SupportGrid(ValueDistribution const &d, std::size_t points)
{
  std::vector<double> grid;
  if (points == 0)
  {
    return grid;
  }
  if (points == 1)
  {
    return {d.lo()};
  }
  double const lo = d.lo();
  double const hi = d.EffectiveHi();
  grid.reserve(points);
  for (std::size_t i = 0; i < points; ++i)
  {
    grid.push_back(i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return grid;
}

std::vector<double> InteriorGrid(ValueDistribution const &d, std::size_t points)
{
  std::vector<double> grid;
  double const lo = d.lo();
  double const hi = d.EffectiveHi();
  grid.reserve(points);
  for (std::size_t i = 0; i < points; ++i)
  {
    grid.push_back(lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(points + 1));
  }
  return grid;
}

}  // namespace tfmlab
