#pragma once

#include "tfmlab/rng.hpp"

#include "json.hpp"

#include <limits>
#include <string>
#include <vector>

namespace tfmlab {

enum class DistributionKind
{
  kUniform,
  kExponential,
  kTruncatedExponential,
  kPiecewiseLinearCdf
};

/**
 * I.i.d. prior over user values. Immutable after construction.
 */
class ValueDistribution
{
public:
  static constexpr double kTailMass = 1e-9;

  static ValueDistribution Uniform(double lo, double hi);
  static ValueDistribution Exponential(double rate);
  // exponential(rate) conditioned on [0, hi]
  static ValueDistribution TruncatedExponential(double rate, double hi);
  static ValueDistribution PiecewiseLinearCdf(std::vector<double> knots, std::vector<double> cdf);

  static ValueDistribution FromJson(nlohmann::json const &j);
  nlohmann::json ToJson() const;
  std::string Describe() const;

  DistributionKind kind() const
  {
    return kind_;
  }
  double lo() const
  {
    return lo_;
  }
  double hi() const
  {
    return hi_;
  }
  // rate parameter of the exponential kinds
  double rate() const
  {
    return rate_;
  }
  bool bounded() const
  {
    return hi_ < std::numeric_limits<double>::infinity();
  }
  // upper end used for grids and quadrature: hi, or quantile(1 - 1e-9)
  double EffectiveHi() const;

  double Cdf(double v) const;
  double Pdf(double v) const;
  double Quantile(double u) const;
  double Sample(RngStream &stream) const
  {
    return Quantile(stream.NextUniform());
  }

private:
  ValueDistribution() = default;

  DistributionKind    kind_{DistributionKind::kUniform};
  double              lo_{0.0};
  double              hi_{1.0};
  double              rate_{1.0};
  double              mass_{1.0};  // truncated exponential normaliser
  std::vector<double> knots_;
  std::vector<double> cdf_;
};

double VirtualValue(ValueDistribution const &d, double v);

double MonopolyReserve(ValueDistribution const &d);

struct ReserveResult
{
  double value;
  bool   no_root;  // true when the fallback sup{v : phi(v) <= 0} was used
};

ReserveResult MonopolyReserveOrFallback(ValueDistribution const &d);

double InverseVirtual(ValueDistribution const &d, double w);

struct RegularityReport
{
  bool   regular;
  double alpha_lower_bound;
};

RegularityReport CheckRegularity(ValueDistribution const &d, std::vector<double> const &grid);

// evenly spaced grid over [lo, EffectiveHi()]
std::vector<double> SupportGrid(ValueDistribution const &d, std::size_t points);
// evenly spaced grid strictly inside the support
std::vector<double> InteriorGrid(ValueDistribution const &d, std::size_t points);

}  // namespace tfmlab
