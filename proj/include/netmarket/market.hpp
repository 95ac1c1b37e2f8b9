#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "netmarket/errors.hpp"
#include "netmarket/powerlaw.hpp"
#include "netmarket/valuefn.hpp"

namespace netmarket {

/// Scalar inputs of the two-sided market.
///
/// gamma and beta are the tail exponents of the consumer and content-
/// provider type laws, lambda converts a provider's expected audience into
/// provider utility, a is the provider's cost per unit type, and value is
/// the consumer value curve phi.
struct MarketParams {
  double gamma;
  double beta;
  double lambda;
  double a;
  std::shared_ptr<const ValueFunction> value;

  /// Convenience constructor for the canonical phi(r) = r^theta curve.
  static MarketParams fractional(double gamma, double beta, double lambda,
                                 double a, double theta) {
    return MarketParams{gamma, beta, lambda, a,
                        std::make_shared<FractionalPower>(theta)};
  }
};

/// Participation cutoffs: consumers of type >= x_t and providers of type
/// >= y_t stay in the market.
struct Thresholds {
  double x_t;
  double y_t;
};

/// Posted fees: a flat membership fee c on consumers and a per-unit-type
/// fee b on providers.  Subsidies (negative fees) are out of scope, so
/// both components are nonnegative by construction.
struct Pricing {
  double b;
  double c;
};

/// The one-channel market: traffic, speed, utilities, the threshold-to-
/// price mapping, revenue, and social welfare, all as functions of the
/// participation thresholds.
///
/// Every quantity below is a closed form in the power-law tail integrals;
/// the oracle suite re-derives each one by quadrature, grid search, or
/// Monte Carlo.
class Market {
 public:
  explicit Market(MarketParams params)
      : params_(std::move(params)),
        consumers_(Exponent(params_.gamma)),
        providers_(Exponent(params_.beta)) {
    if (!(params_.lambda > 0.0)) {
      throw invalid_parameter("lambda must be positive, got " +
                              std::to_string(params_.lambda));
    }
    if (!(params_.a >= 0.0)) {
      throw invalid_parameter("provider cost a must be nonnegative, got " +
                              std::to_string(params_.a));
    }
    if (params_.value == nullptr) {
      throw invalid_parameter("market requires a value function");
    }
    // Surface a divergent phi integral at construction rather than deep in
    // a solve: for the fractional-power curve this enforces gamma > theta+1.
    (void)params_.value->phi_prime_tail_integral(consumers_, 1.0);
  }

  const MarketParams& params() const { return params_; }
  const PowerLaw& consumers() const { return consumers_; }
  const PowerLaw& providers() const { return providers_; }
  const ValueFunction& value() const { return *params_.value; }

  double min_consumer_type() const { return consumers_.min_type(); }
  double min_provider_type() const { return providers_.min_type(); }

  /// Maximum traffic T0 = Xbar * Ybar, reached at full participation.
  double base_traffic() const { return consumers_.mean() * providers_.mean(); }

  /// Total traffic at the given thresholds:
  /// T = sqrt(T0 * Ix(x_t) * Iy(y_t)) with I* the tail first moments.
  double traffic(const Thresholds& th) const {
    check(th);
    return std::sqrt(base_traffic() * consumers_.tail_first_moment(th.x_t) *
                     providers_.tail_first_moment(th.y_t));
  }

  /// Relative network speed T0 / T; >= 1, with equality at full participation.
  double speed(const Thresholds& th) const { return base_traffic() / traffic(th); }

  /// Consumer-side match scale K(th): a type-x consumer expects K*x worth
  /// of liked content, K = sqrt(T0 * Iy / Ix).
  double consumer_match_scale(const Thresholds& th) const {
    check(th);
    return std::sqrt(base_traffic() * providers_.tail_first_moment(th.y_t) /
                     consumers_.tail_first_moment(th.x_t));
  }

  /// Provider-side match scale L(th): a type-y provider expects L*y worth
  /// of audience, L = sqrt(T0 * Ix / Iy).
  double provider_match_scale(const Thresholds& th) const {
    check(th);
    return std::sqrt(base_traffic() * consumers_.tail_first_moment(th.x_t) /
                     providers_.tail_first_moment(th.y_t));
  }

  /// Utility of a participating consumer of type x under membership fee c.
  double consumer_utility(const Thresholds& th, double x, double c) const {
    if (!(x >= th.x_t)) {
      throw invalid_parameter("consumer_utility: type " + std::to_string(x) +
                              " below threshold " + std::to_string(th.x_t));
    }
    return value().phi(consumer_match_scale(th) * x) - c;
  }

  /// Utility of a participating provider of type y under per-type fee b.
  double cp_utility(const Thresholds& th, double y, double b) const {
    if (!(y >= th.y_t)) {
      throw invalid_parameter("cp_utility: type " + std::to_string(y) +
                              " below threshold " + std::to_string(th.y_t));
    }
    return (params_.lambda * provider_match_scale(th) - b - params_.a) * y;
  }

  /// The unique fee pair that makes (x_t, y_t) exactly the marginal types:
  /// c = phi(K x_t) and b = lambda * L - a.  Throws infeasible_prices when
  /// the implied b is negative (the cutoffs would need a subsidy).
  Pricing threshold_prices(const Thresholds& th) const {
    check(th);
    const double c = value().phi(consumer_match_scale(th) * th.x_t);
    const double b = params_.lambda * provider_match_scale(th) - params_.a;
    if (b < 0.0) {
      throw infeasible_prices(
          "thresholds need a provider subsidy (implied b = " + std::to_string(b) +
          "); not attainable with nonnegative fees");
    }
    return Pricing{b, c};
  }

  /// Platform revenue at the given fees:
  /// R = c * (consumer mass above x_t) + b * (provider type mass above y_t).
  double revenue(const Thresholds& th, const Pricing& prices) const {
    check(th);
    return prices.c * consumers_.tail_mass(th.x_t) +
           prices.b * providers_.tail_first_moment(th.y_t);
  }

  /// Revenue under the threshold-inducing fees for th.
  double revenue(const Thresholds& th) const {
    return revenue(th, threshold_prices(th));
  }

  /// Revenue at thresholds whether or not the implied b is nonnegative;
  /// used by optimizers that must evaluate the closed form everywhere and
  /// apply the feasibility constraint separately.
  double revenue_unchecked(const Thresholds& th) const {
    check(th);
    const double c = value().phi(consumer_match_scale(th) * th.x_t);
    const double b = params_.lambda * provider_match_scale(th) - params_.a;
    return c * consumers_.tail_mass(th.x_t) +
           b * providers_.tail_first_moment(th.y_t);
  }

  /// Social welfare: total consumer value plus total provider value minus
  /// provider costs.  Independent of fees, which are pure transfers:
  ///
  ///   S = integral_{x_t} phi(K x) x^(-gamma) dx
  ///     + lambda * sqrt(T0 * Ix * Iy) - a * Iy
  double welfare(const Thresholds& th) const {
    check(th);
    const double ix = consumers_.tail_first_moment(th.x_t);
    const double iy = providers_.tail_first_moment(th.y_t);
    const double k = std::sqrt(base_traffic() * iy / ix);
    const double consumer_value =
        value().phi_tail_integral_from(consumers_, k, th.x_t);
    return consumer_value + params_.lambda * std::sqrt(base_traffic() * ix * iy) -
           params_.a * iy;
  }

 private:
  void check(const Thresholds& th) const {
    if (!(th.x_t >= consumers_.min_type())) {
      throw invalid_parameter("consumer threshold " + std::to_string(th.x_t) +
                              " below minimum type " +
                              std::to_string(consumers_.min_type()));
    }
    if (!(th.y_t >= providers_.min_type())) {
      throw invalid_parameter("provider threshold " + std::to_string(th.y_t) +
                              " below minimum type " +
                              std::to_string(providers_.min_type()));
    }
  }

  MarketParams params_;
  PowerLaw consumers_;
  PowerLaw providers_;
};

}  // namespace netmarket
