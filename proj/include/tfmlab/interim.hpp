#pragma once

#include "tfmlab/engine.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tfmlab {

/**
 * Interim allocation x(v) and payment p(v) of one user, tabulated on a value grid.
 */
struct InterimRules
{
  std::vector<double> grid;
  std::vector<double> x;
  std::vector<double> p;
  std::vector<double> se_x;
  std::vector<double> se_p;

  nlohmann::json ToJson() const;
};

// Opponent draws are shared across grid points, so neighbouring estimates are positively correlated.
InterimRules ComputeInterimRules(Game const &game, OnChainProfile const &profile, std::size_t user,
                                 std::vector<double> const &grid, std::uint64_t reps, std::uint64_t seed);

struct PaymentIdentityReport
{
  bool                pass{true};
  double              worst_excess{0.0};  // max of |residual| - allowance
  double              worst_v{0.0};
  std::vector<double> residual;
  std::vector<double> allowance;

  nlohmann::json ToJson() const;
};

/**
 * Checks p(v) - p(v0) = v x(v) - v0 x(v0) - ∫ x over the grid. The allowance at each
 * point is tol + 3 propagated standard errors + the trapezoid error bound for a
 * monotone integrand, Σ h/2 |Δx|. Throws MonotonicityViolation when x falls by more
 * than 3 standard errors between neighbours.
 */
PaymentIdentityReport CheckPaymentIdentity(InterimRules const &rules, double tol);

struct VirtualWelfareReport
{
  SimEstimate lhs;  // Σ user payments
  SimEstimate rhs;  // Σ φ(vᵢ) over included users
  double      diff{0.0};
  double      std_err{0.0};  // of the paired difference

  bool           Within(double z) const;
  nlohmann::json ToJson() const;
};

VirtualWelfareReport RevenueEqualsVirtualWelfare(Game const &game, OnChainProfile const &profile, std::uint64_t reps,
                                                 std::uint64_t seed);

// one draw of Σ top-k (φ(vᵢ) - burn)⁺; scratch is resized as needed
double BenchmarkSample(ValueDistribution const &d, std::span<double const> values, std::size_t k, double burn,
                       std::vector<double> &scratch);

// order-statistic quadrature of the same expectation
double OptimalRevenueQuadrature(ValueDistribution const &d, std::size_t n, std::size_t k, double burn);

struct BenchmarkReport
{
  double        value{0.0};  // Monte Carlo mean
  double        std_err{0.0};
  std::uint64_t reps{0};
  double        quadrature{0.0};

  nlohmann::json ToJson() const;
};

inline constexpr std::uint64_t kBenchmarkReps = 10'000'000;
inline constexpr std::uint64_t kBenchmarkSeed = 0x5EED'BE4C'11A7'0001ULL;

BenchmarkReport OptimalRevenueBenchmarkReport(ValueDistribution const &d, std::size_t n, std::size_t k, double burn,
                                              std::uint64_t reps = kBenchmarkReps,
                                              std::uint64_t seed = kBenchmarkSeed);

double OptimalRevenueBenchmark(ValueDistribution const &d, std::size_t n, std::size_t k, double burn,
                               std::uint64_t reps = kBenchmarkReps, std::uint64_t seed = kBenchmarkSeed);

struct EquivalenceReport
{
  bool   pass{false};
  double diff{0.0};
  double std_err{0.0};

  nlohmann::json ToJson() const;
};

// pass iff |a - b| <= z·√(se_a² + se_b²)
EquivalenceReport CheckRevenueEquivalence(SimEstimate const &a, SimEstimate const &b, double z = 3.0);

}  // namespace tfmlab
