#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "netmarket/errors.hpp"
#include "netmarket/market.hpp"
#include "netmarket/rootfind.hpp"

namespace netmarket {

/// Whether an optimum keeps every provider in the market (y_t = y0) or
/// excludes a tail (y_t above y0).  The consumer cutoff is x0 either way.
enum class Regime { kBoundary, kInterior };

inline const char* regime_name(Regime r) {
  return r == Regime::kBoundary ? "boundary" : "interior";
}

/// A solved pricing problem: the optimal cutoffs, the fee pair inducing
/// them, and the objective values there.
///
/// For the socially optimal problem the fee pair is not unique (any pair
/// that keeps the same marginal types works); `prices_unique` is false
/// there and the maximal threshold-inducing pair is reported.
struct RegimeSolution {
  Regime regime;
  Thresholds thresholds;
  Pricing pricing;
  double revenue;
  double welfare;
  bool prices_unique;
};

/// The two regime-boundary constants: eta = g(y0) separates the revenue
/// problem's boundary/interior regimes, zeta = max(g(y0), h(y0)) the
/// social one's (for concave power curves zeta = h(y0)).
struct ThresholdConstants {
  double zeta;
  double eta;
};

/// Both cutoffs at the same cost level, for comparing how many providers
/// each objective excludes.
struct CutoffComparison {
  double y_hat;   ///< socially optimal cutoff
  double y_star;  ///< revenue-optimal cutoff
};

/// Analytic solvers for the one-channel pricing problems.
///
/// Everything reduces to two strictly increasing functions of the provider
/// cutoff, g (revenue first-order condition) and h (welfare first-order
/// condition): the optimal cutoff is y0 while the cost a is below the
/// function's value there, and the unique root above it otherwise.
class Solver {
 public:
  explicit Solver(MarketParams params)
      : market_(params), market_free_(with_cost(params, 0.0)) {}

  const Market& market() const { return market_; }

  /// Revenue first-order condition:
  /// g(y) = 1/2 ((gamma-2)/(gamma-1) phi'(sqrt(Ybar Iy) x0) + lambda) Xbar sqrt(Ybar)/sqrt(Iy).
  double g(double y_t) const {
    const double iy = market_.providers().tail_first_moment(y_t);
    const double gamma = market_.params().gamma;
    const double xbar = market_.consumers().mean();
    const double ybar = market_.providers().mean();
    const double slope = market_.value().phi_prime(
        std::sqrt(ybar * iy) * market_.min_consumer_type());
    return 0.5 * ((gamma - 2.0) / (gamma - 1.0) * slope + market_.params().lambda) *
           xbar * std::sqrt(ybar / iy);
  }

  /// Welfare first-order condition:
  /// h(y) = 1/2 (integral phi'(sqrt(Ybar Iy) x) x^(1-gamma) dx + lambda Xbar) sqrt(Ybar)/sqrt(Iy).
  double h(double y_t) const {
    const double iy = market_.providers().tail_first_moment(y_t);
    const double xbar = market_.consumers().mean();
    const double ybar = market_.providers().mean();
    const double tail = market_.value().phi_prime_tail_integral(
        market_.consumers(), std::sqrt(ybar * iy));
    return 0.5 * (tail + market_.params().lambda * xbar) * std::sqrt(ybar / iy);
  }

  ThresholdConstants constants() const {
    const double y0 = market_.min_provider_type();
    const double g0 = g(y0);
    const double h0 = h(y0);
    return ThresholdConstants{std::max(g0, h0), std::min(g0, h0)};
  }

  /// Revenue-optimal provider cutoff y*(a): y0 while a <= g(y0), else the
  /// unique root of g(y) = a.
  double revenue_cutoff(double a) const {
    const double y0 = market_.min_provider_type();
    if (a <= g(y0)) return y0;
    return solve_increasing([&](double y) { return g(y) - a; }, y0);
  }

  /// Socially optimal provider cutoff y_hat(a): y0 while a <= h(y0), else
  /// the unique root of h(y) = a.
  double social_cutoff(double a) const {
    const double y0 = market_.min_provider_type();
    if (a <= h(y0)) return y0;
    return solve_increasing([&](double y) { return h(y) - a; }, y0);
  }

  /// Optimal provider-side pricing when no membership fee is charged
  /// (c = 0).  Below a = (lambda/2) Xbar every provider is kept and the
  /// fee extracts the full match value; above it the fee equals the cost a
  /// and the cutoff follows from the first-order condition directly.
  RegimeSolution solve_revenue_c0() const {
    const double a = market_.params().a;
    const double lambda = market_.params().lambda;
    const double xbar = market_.consumers().mean();
    const double y0 = market_.min_provider_type();
    const double beta = market_.params().beta;

    Thresholds th{market_.min_consumer_type(), y0};
    double b = 0.0;
    Regime regime = Regime::kBoundary;
    if (a <= 0.5 * lambda * xbar) {
      b = lambda * xbar - a;
    } else {
      regime = Regime::kInterior;
      b = a;
      // Invert a = (lambda/2) sqrt(T0 Xbar / Iy):
      const double iy = std::pow(0.5 * lambda / a, 2.0) * market_.base_traffic() * xbar;
      th.y_t = std::pow((beta - 2.0) * iy, 1.0 / (2.0 - beta));
    }
    const double iy = market_.providers().tail_first_moment(th.y_t);
    return RegimeSolution{regime, th, Pricing{b, 0.0},
                          /*revenue=*/b * iy, market_.welfare(th),
                          /*prices_unique=*/true};
  }

  /// Revenue-optimal two-sided pricing.  Throws infeasible_prices when the
  /// optimum would require a provider subsidy (b < 0), which happens when
  /// the consumer side's marginal value is large relative to lambda.
  RegimeSolution solve_revenue() const {
    const double a = market_.params().a;
    const double y0 = market_.min_provider_type();
    const Regime regime = (a <= g(y0)) ? Regime::kBoundary : Regime::kInterior;
    const Thresholds th{market_.min_consumer_type(),
                        regime == Regime::kBoundary ? y0 : revenue_cutoff(a)};
    const Pricing prices = market_.threshold_prices(th);
    return RegimeSolution{regime, th, prices, market_.revenue(th, prices),
                          market_.welfare(th), /*prices_unique=*/true};
  }

  /// Socially optimal cutoffs with the maximal threshold-inducing fee
  /// pair.  Any cheaper pair inducing the same thresholds is equally
  /// optimal (welfare ignores transfers), hence prices_unique = false.
  RegimeSolution solve_social() const {
    const double a = market_.params().a;
    const double y0 = market_.min_provider_type();
    const Regime regime = (a <= h(y0)) ? Regime::kBoundary : Regime::kInterior;
    const Thresholds th{market_.min_consumer_type(),
                        regime == Regime::kBoundary ? y0 : social_cutoff(a)};
    const Pricing prices = market_.threshold_prices(th);
    return RegimeSolution{regime, th, prices, market_.revenue(th, prices),
                          market_.welfare(th), /*prices_unique=*/false};
  }

  /// Cutoffs of both objectives at the base cost; defined for costs above
  /// zeta where both optima are interior.  For concave power curves the
  /// social cutoff is strictly the smaller one (fewer providers excluded).
  CutoffComparison compare_cutoffs() const {
    const double a = market_.params().a;
    const ThresholdConstants zs = constants();
    if (!(a > zs.zeta)) {
      throw invalid_parameter(
          "cutoff comparison requires a > zeta (both optima interior); a = " +
          std::to_string(a) + ", zeta = " + std::to_string(zs.zeta));
    }
    return CutoffComparison{social_cutoff(a), revenue_cutoff(a)};
  }

  /// Welfare at provider cutoff y_t under cost level a, with the consumer
  /// cutoff at x0.  Fee-free by construction: welfare ignores transfers,
  /// so this is defined even where no nonnegative fee pair induces y_t.
  double welfare_at_cutoff(double y_t, double a) const {
    if (!(a >= 0.0)) {
      throw invalid_parameter("welfare_at_cutoff: cost must be nonnegative, got " +
                              std::to_string(a));
    }
    const Thresholds th{market_.min_consumer_type(), y_t};
    return market_free_.welfare(th) -
           a * market_.providers().tail_first_moment(y_t);
  }

  /// Welfare of the full-participation (net-neutral) configuration at cost
  /// level a, minus welfare at the revenue-optimal cutoff for that a.
  /// Positive: neutrality is socially better; negative: worse.
  double welfare_gap(double a) const {
    const double y0 = market_.min_provider_type();
    return welfare_at_cutoff(y0, a) - welfare_at_cutoff(revenue_cutoff(a), a);
  }

  /// The unique cost level abar at which the welfare gap changes sign.
  ///
  /// A 200-point log scan over [1.01 zeta, 20 zeta] locates and counts
  /// sign changes first; multiple changes are reported as an error rather
  /// than silently resolving one.  If the scan sees none, the bracket is
  /// widened: upward by doubling to 2^16 zeta, or downward toward zeta
  /// (the gap is positive immediately above zeta, so an all-negative scan
  /// means the crossing hugs zeta).
  double find_transition() const {
    const double zeta = constants().zeta;
    const int n = 200;
    const double lo = 1.01 * zeta;
    const double hi = 20.0 * zeta;
    std::vector<double> as(n);
    std::vector<double> gaps(n);
    const double ratio = std::log(hi / lo);
    for (int i = 0; i < n; ++i) {
      as[i] = lo * std::exp(ratio * static_cast<double>(i) / (n - 1));
      gaps[i] = welfare_gap(as[i]);
    }
    int changes = 0;
    int at = -1;
    for (int i = 0; i + 1 < n; ++i) {
      if ((gaps[i] > 0.0) != (gaps[i + 1] > 0.0)) {
        ++changes;
        at = i;
      }
    }
    if (changes > 1) {
      throw bracket_error("welfare gap changes sign " + std::to_string(changes) +
                          " times on the scan grid; transition not unique");
    }
    auto gap = [&](double a) { return welfare_gap(a); };
    if (changes == 1) {
      return solve_bracketed(gap, as[at], as[at + 1], gaps[at], gaps[at + 1]);
    }
    if (gaps[0] > 0.0) {
      // Gap still positive at 20 zeta: the crossing lies above; double out.
      double left = as[n - 1];
      double f_left = gaps[n - 1];
      double right = 2.0 * left;
      while (right <= std::pow(2.0, 16) * zeta) {
        const double f_right = gap(right);
        if (f_right <= 0.0) return solve_bracketed(gap, left, right, f_left, f_right);
        left = right;
        f_left = f_right;
        right *= 2.0;
      }
      throw bracket_error("welfare gap stays positive up to 2^16 zeta");
    }
    // Gap already negative at 1.01 zeta: the crossing hugs zeta from above.
    const double near = zeta * (1.0 + 1e-9);
    const double f_near = gap(near);
    if (f_near > 0.0) return solve_bracketed(gap, near, as[0], f_near, gaps[0]);
    throw bracket_error(
        "welfare gap not positive just above zeta; no transition found");
  }

 private:
  static MarketParams with_cost(MarketParams p, double a) {
    p.a = a;
    return p;
  }

  // The cost enters welfare linearly, so one cost-free market serves every
  // cost level queried by welfare_at_cutoff.
  Market market_;
  Market market_free_;
};

}  // namespace netmarket
