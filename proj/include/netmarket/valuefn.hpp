#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "netmarket/errors.hpp"
#include "netmarket/powerlaw.hpp"
#include "netmarket/quadrature.hpp"

namespace netmarket {

/// Consumer value of content consumption as a function of the effective
/// rate r = (match intensity) * (own type).  phi must be increasing and
/// concave with phi(0) = 0; those shape properties are what every
/// closed-form solution in the model leans on.
///
/// Two tail integrals against the consumer type law recur throughout the
/// solver; the base class evaluates both by adaptive quadrature so any
/// admissible phi works, and FractionalPower overrides them with exact
/// expressions.
class ValueFunction {
 public:
  virtual ~ValueFunction() = default;

  virtual double phi(double r) const = 0;
  virtual double phi_prime(double r) const = 0;

  /// integral_{x0}^inf phi'(Z x) x^(1-gamma) dx against the consumer law.
  virtual double phi_prime_tail_integral(const PowerLaw& consumers, double z) const {
    require_positive_scale(z, "phi_prime_tail_integral");
    const double gamma = consumers.exponent();
    auto f = [&](double x) { return phi_prime(z * x) * std::pow(x, 1.0 - gamma); };
    // phi' is decreasing, so the integrand decays at least as fast as
    // x^(1-gamma); gamma - 1 > 1 is a convergent, conservative rate.
    return integrate_tail(f, consumers.min_type(), gamma - 1.0);
  }

  /// integral_{lower}^inf phi(K x) x^(-gamma) dx against the consumer law;
  /// `lower` must lie in the law's support.
  virtual double phi_tail_integral_from(const PowerLaw& consumers, double k,
                                        double lower) const {
    require_positive_scale(k, "phi_tail_integral_from");
    const double gamma = consumers.exponent();
    auto f = [&](double x) { return phi(k * x) * std::pow(x, -gamma); };
    // Concavity with phi(0) = 0 bounds phi by a linear function, so the
    // integrand decays at least as fast as x^(1-gamma).
    return integrate_tail(f, lower, gamma - 1.0);
  }

 protected:
  static void require_positive_scale(double z, const char* op) {
    if (!(z > 0.0)) {
      throw invalid_parameter(std::string(op) + ": scale must be positive, got " +
                              std::to_string(z));
    }
  }
};

/// phi(r) = r^theta with theta in (0, 1): the canonical concave value
/// curve.  Both tail integrals reduce to pure power integrals:
///
///   integral_x0^inf phi'(Zx) x^(1-gamma) dx = theta Z^(theta-1) x0^(1+theta-gamma) / (gamma-theta-1)
///   integral_L^inf  phi(Kx)  x^(-gamma)  dx = K^theta L^(1+theta-gamma) / (gamma-theta-1)
///
/// both finite exactly when gamma > theta + 1.
class FractionalPower final : public ValueFunction {
 public:
  explicit FractionalPower(double theta) : theta_(theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
      throw invalid_parameter("fractional-power elasticity must lie in (0, 1), got " +
                              std::to_string(theta));
    }
  }

  double theta() const { return theta_; }

  double phi(double r) const override { return std::pow(r, theta_); }
  double phi_prime(double r) const override {
    return theta_ * std::pow(r, theta_ - 1.0);
  }

  double phi_prime_tail_integral(const PowerLaw& consumers, double z) const override {
    require_positive_scale(z, "phi_prime_tail_integral");
    const double denom = convergence_margin(consumers);
    return theta_ * std::pow(z, theta_ - 1.0) *
           std::pow(consumers.min_type(), 1.0 + theta_ - consumers.exponent()) / denom;
  }

  double phi_tail_integral_from(const PowerLaw& consumers, double k,
                                double lower) const override {
    require_positive_scale(k, "phi_tail_integral_from");
    const double denom = convergence_margin(consumers);
    return std::pow(k, theta_) *
           std::pow(lower, 1.0 + theta_ - consumers.exponent()) / denom;
  }

 private:
  /// gamma - theta - 1, the exponent margin both integrals divide by.
  double convergence_margin(const PowerLaw& consumers) const {
    const double margin = consumers.exponent() - theta_ - 1.0;
    if (!(margin > 0.0)) {
      throw divergent_integral(
          "value tail integral diverges: requires gamma > theta + 1, got gamma = " +
          std::to_string(consumers.exponent()) + ", theta = " + std::to_string(theta_));
    }
    return margin;
  }

  double theta_;
};

/// An arbitrary value curve supplied as callables.  Construction probes a
/// few points to catch the common mistakes (nonzero origin, decreasing or
/// convex curves); the probes are a sanity net, not a proof of shape.
class CustomValue final : public ValueFunction {
 public:
  CustomValue(std::function<double(double)> phi_fn,
              std::function<double(double)> phi_prime_fn)
      : phi_(std::move(phi_fn)), phi_prime_(std::move(phi_prime_fn)) {
    validate_shape();
  }

  double phi(double r) const override { return phi_(r); }
  double phi_prime(double r) const override { return phi_prime_(r); }

 private:
  void validate_shape() const {
    if (std::abs(phi_(0.0)) > 1e-12) {
      throw invalid_parameter("custom value function must satisfy phi(0) = 0");
    }
    double prev_phi = 0.0;
    double prev_slope = phi_prime_(0.125);
    for (double r = 0.25; r <= 64.0; r *= 2.0) {
      const double v = phi_(r);
      const double s = phi_prime_(r);
      if (!(v > prev_phi)) {
        throw invalid_parameter("custom value function must be strictly increasing");
      }
      if (s > prev_slope * (1.0 + 1e-9)) {
        throw invalid_parameter("custom value function must be concave "
                                "(derivative nonincreasing)");
      }
      prev_phi = v;
      prev_slope = s;
    }
  }

  std::function<double(double)> phi_;
  std::function<double(double)> phi_prime_;
};

}  // namespace netmarket
