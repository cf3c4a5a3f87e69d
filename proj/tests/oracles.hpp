#pragma once

// Test-side reference values. Nothing here calls into the library: integrals are
// evaluated with a local adaptive Simpson rule on integrands written out by hand,
// and the frozen constants below were produced by these oracles before the
// library code was exercised.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

inline double SimpsonStep(Fn const &f, double a, double fa, double b, double fb, double m, double fm, double whole,
                          double eps, int depth)
{
  double const lm   = 0.5 * (a + m);
  double const rm   = 0.5 * (m + b);
  double const flm  = f(lm);
  double const frm  = f(rm);
  double const left  = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double const right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double const delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
  {
    return left + right + delta / 15.0;
  }
  return SimpsonStep(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
         SimpsonStep(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

// adaptive Simpson on [a, b]; integrand must be smooth on the open interval
inline double Integrate(Fn const &f, double a, double b, double eps = 1e-12)
{
  if (b <= a)
  {
    return 0.0;
  }
  double const m  = 0.5 * (a + b);
  double const fa = f(a);
  double const fb = f(b);
  double const fm = f(m);
  return SimpsonStep(f, a, fa, b, fb, m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, 40);
}

// integrate over consecutive breakpoints so kinks and jumps sit on panel edges
inline double IntegratePieces(Fn const &f, std::vector<double> cuts, double eps = 1e-12)
{
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
  {
    total += Integrate(f, cuts[i], cuts[i + 1], eps);
  }
  return total;
}

// ---------------------------------------------------------------------------
// U[0,1], two users

// second price with reserve r: E[max(second, r) 1{first >= r}]
inline double SecondPriceRevenueTwoUsers(double r)
{
  auto inner = [r](double a) {
    return IntegratePieces(
      [a, r](double b) {
        double const hi = std::max(a, b);
        double const lo = std::min(a, b);
        return hi >= r ? std::max(lo, r) : 0.0;
      },
      {0.0, r, a, 1.0});
  };
  return IntegratePieces(inner, {0.0, r, 1.0}, 1e-10);
}

// squared-revenue second price: E[max(second, r)² 1{first >= r}]
inline double SquaredSecondPriceRevenueTwoUsers(double r)
{
  auto inner = [r](double a) {
    return IntegratePieces(
      [a, r](double b) {
        double const hi = std::max(a, b);
        double const lo = std::min(a, b);
        double const p  = std::max(lo, r);
        return hi >= r ? p * p : 0.0;
      },
      {0.0, r, a, 1.0});
  };
  return IntegratePieces(inner, {0.0, r, 1.0}, 1e-10);
}

// joint miner + user surplus when a user with value v bids b against one truthful
// opponent in a second price auction with reserve r
inline double CartelJoint(double v, double b, double r)
{
  auto joint = [v, b, r](double w) {
    double const top = std::max(b, w);
    if (top < r)
    {
      return 0.0;
    }
    double const price = std::max(std::min(b, w), r);
    // user wins on ties at equal bids only if listed first; measure zero here
    return b >= w ? price + (v - price) : price;
  };
  return IntegratePieces(joint, {0.0, v, b, r, 1.0});
}

// winner-pays-bid equilibrium shading with one opponent: E[max(r, w) | w <= v]
inline double ShadeTwoUsers(double r, double v)
{
  return (v * v + r * r) / (2.0 * v);
}

// interim allocation and payment of the second price auction, one opponent
inline double InterimAllocation(double r, double v)
{
  return v >= r ? v : 0.0;
}
inline double InterimPayment(double r, double v)
{
  if (v < r)
  {
    return 0.0;
  }
  return r * r + Integrate([](double w) { return w; }, r, v);
}

// ---------------------------------------------------------------------------
// frozen values

inline constexpr double kC2paRevenue        = 5.0 / 12.0;        // SecondPriceRevenueTwoUsers(0.5)
inline constexpr double kSr2paRevenue       = 23.0 / 96.0;       // SquaredSecondPriceRevenueTwoUsers(0.5)
inline constexpr double kSr2paFirstPrice    = 0.125;             // E[(max/2)²]
inline constexpr double kP2paMaxBidGain     = 2.0 / 3.0 - 5.0 / 12.0;
inline constexpr double kCollusionBaseline  = 0.60;              // CartelJoint(0.6, 0.6, 0.5)
inline constexpr double kCollusionShill     = 0.64;              // CartelJoint(0.6, 0.8, 0.5)
inline constexpr double kEipRevenueP04N3    = 0.72;              // 3 · 0.4 · 0.6
inline constexpr double kEipPostedPerUser   = 0.1225;            // (0.65 - 0.3) · 0.35
inline constexpr double kInterimX075        = 0.75;
inline constexpr double kInterimP075        = 0.40625;
inline constexpr double kBombPostedRevenue  = 0.5;               // 2 · 0.5 · 0.5
inline constexpr double kWpbZeroReserve     = 1.0 / 3.0;         // E[max]/2

}  // namespace oracle
