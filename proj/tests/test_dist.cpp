#include "tfmlab/dist.hpp"
#include "tfmlab/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tfmlab;

TEST(Dist, UniformBasics)
{
  auto const d = ValueDistribution::Uniform(0.0, 1.0);
  EXPECT_DOUBLE_EQ(d.Cdf(0.25), 0.25);
  EXPECT_DOUBLE_EQ(d.Pdf(0.25), 1.0);
  EXPECT_DOUBLE_EQ(d.Quantile(0.75), 0.75);
  EXPECT_DOUBLE_EQ(d.Cdf(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(d.Cdf(2.0), 1.0);
  EXPECT_TRUE(d.bounded());
  EXPECT_NEAR(VirtualValue(d, 0.8), 0.6, 1e-15);
}

TEST(Dist, MonopolyReserveAndInverse)
{
  auto const d = ValueDistribution::Uniform(0.0, 1.0);
  EXPECT_NEAR(MonopolyReserve(d), 0.5, 1e-9);
  EXPECT_NEAR(InverseVirtual(d, 0.3), 0.65, 1e-9);
  EXPECT_NEAR(InverseVirtual(d, 0.6), 0.8, 1e-9);
  // reserve lands on the exact double so a value of 0.5 clears it
  EXPECT_LE(MonopolyReserve(d), 0.5);

  auto const e = ValueDistribution::Exponential(2.0);
  EXPECT_NEAR(MonopolyReserve(e), 0.5, 1e-9);  // 1 / rate
  EXPECT_NEAR(InverseVirtual(e, 1.0), 1.5, 1e-9);
}

TEST(Dist, ExponentialMoments)
{
  auto const e = ValueDistribution::Exponential(1.0);
  EXPECT_NEAR(e.Cdf(1.0), 1.0 - std::exp(-1.0), 1e-14);
  EXPECT_NEAR(e.Quantile(e.Cdf(2.5)), 2.5, 1e-12);
  EXPECT_FALSE(e.bounded());
  // 1 - kTailMass is rounded before the log
  EXPECT_NEAR(e.EffectiveHi(), -std::log(ValueDistribution::kTailMass), 1e-6);
}

TEST(Dist, RegularityOfExponential)
{
  auto const e      = ValueDistribution::Exponential(1.0);
  auto const report = CheckRegularity(e, SupportGrid(e, 401));
  EXPECT_TRUE(report.regular);
  EXPECT_NEAR(report.alpha_lower_bound, 1.0, 1e-3);
}

TEST(Dist, TruncatedExponentialIsNormalised)
{
  auto const t = ValueDistribution::TruncatedExponential(1.0, 2.0);
  EXPECT_NEAR(t.Cdf(2.0), 1.0, 1e-14);
  EXPECT_NEAR(t.Quantile(1.0), 2.0, 1e-12);
  EXPECT_GT(t.Pdf(0.1), t.Pdf(1.9));
}

TEST(Dist, PiecewiseLinearCdfRoundTrip)
{
  auto const p = ValueDistribution::PiecewiseLinearCdf({0.0, 0.5, 1.0}, {0.0, 0.8, 1.0});
  EXPECT_NEAR(p.Cdf(0.25), 0.4, 1e-14);
  EXPECT_NEAR(p.Pdf(0.75), 0.4, 1e-14);
  for (double u : {0.1, 0.5, 0.8, 0.95})
  {
    EXPECT_NEAR(p.Cdf(p.Quantile(u)), u, 1e-12);
  }
  auto const back = ValueDistribution::FromJson(p.ToJson());
  EXPECT_EQ(back.ToJson(), p.ToJson());
}

TEST(Dist, InvalidParametersThrow)
{
  EXPECT_THROW(ValueDistribution::Uniform(1.0, 0.0), InvalidParameter);
  EXPECT_THROW(ValueDistribution::Exponential(-1.0), InvalidParameter);
  EXPECT_THROW(ValueDistribution::PiecewiseLinearCdf({0.0, 1.0}, {0.0, 0.9}), InvalidParameter);
}

TEST(Dist, InverseVirtualOutOfRange)
{
  auto const d = ValueDistribution::Uniform(0.0, 1.0);
  EXPECT_THROW(InverseVirtual(d, 2.0), OutOfRange);
  EXPECT_THROW(InverseVirtual(d, -2.0), OutOfRange);
}

TEST(Dist, VirtualValueMonotoneOnGrid)
{
  for (auto const &d : {ValueDistribution::Uniform(0.0, 1.0), ValueDistribution::Exponential(1.5),
                        ValueDistribution::TruncatedExponential(1.0, 3.0)})
  {
    auto const grid = InteriorGrid(d, 50);
    for (std::size_t i = 1; i < grid.size(); ++i)
    {
      EXPECT_LE(VirtualValue(d, grid[i - 1]), VirtualValue(d, grid[i]) + 1e-12) << d.Describe();
    }
  }
}

TEST(Dist, SamplingMeanOfUniform)
{
  auto const d = ValueDistribution::Uniform(0.0, 1.0);
  RngStream  s(1, 2, 3);
  double     sum = 0.0;
  int const  N   = 200000;
  for (int i = 0; i < N; ++i)
  {
    sum += d.Sample(s);
  }
  // SE = sqrt(1/12 / N)
  EXPECT_NEAR(sum / N, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / N));
}

TEST(Dist, ZeroDensityGap)
{
  auto const p = ValueDistribution::PiecewiseLinearCdf({0.0, 0.4, 0.6, 1.0}, {0.0, 0.5, 0.5, 1.0});
  EXPECT_THROW(VirtualValue(p, 0.5), ZeroDensity);
}
