#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "netmarket/errors.hpp"

namespace netmarket {

/// Default relative tolerance for all adaptive quadrature in the library.
inline constexpr double kQuadRelTol = 1e-11;

namespace quad_detail {

inline std::string num_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace quad_detail

/// Adaptive integration over a finite interval.
///
/// Uses Boost.Math's tanh-sinh rule, which keeps converging when the
/// integrand has an algebraic singularity at an endpoint (the common case
/// after the tail substitution below) and whose error estimate is sharp
/// enough to gate on.  Throws quadrature_error when the estimate stays two
/// orders of magnitude above the requested relative tolerance.
template <typename F>
double integrate(F&& f, double lo, double hi, double rel_tol = kQuadRelTol) {
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  double err = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  const double value = integrator.integrate(f, lo, hi, rel_tol, &err, &l1, &levels);
  const double scale = std::max({std::abs(value), l1, 1.0e-300});
  if (!(err <= 100.0 * rel_tol * scale)) {
    throw quadrature_error("quadrature did not converge: estimated error " +
                           quad_detail::num_str(err) + " on value " +
                           quad_detail::num_str(value));
  }
  return value;
}

/// Integrates f over [lower, +inf) where f(x) = w(x) * x^(-decay) with w
/// bounded and slowly varying, and decay > 1.
///
/// The substitution x = lower * v^(-1/(decay-1)) maps the tail onto (0, 1]
/// and absorbs the power-law weight exactly:
///
///   integral_lower^inf w(x) x^(-decay) dx
///     = lower^(1-decay)/(decay-1) * integral_0^1 w(x(v)) dv
///
/// so a pure power integrand (w constant) is integrated exactly and any
/// residual power weight in w leaves a v^s endpoint singularity that the
/// tanh-sinh rule absorbs -- much better conditioned than a generic
/// compactification of the half-line.  Callers pass the full integrand f
/// together with its decay exponent.
template <typename F>
double integrate_tail(F&& f, double lower, double decay,
                      double rel_tol = kQuadRelTol) {
  if (!(lower > 0.0)) {
    throw invalid_parameter("integrate_tail: lower bound must be positive, got " +
                            std::to_string(lower));
  }
  if (!(decay > 1.0)) {
    throw divergent_integral("integrate_tail: decay exponent must exceed 1, got " +
                             std::to_string(decay));
  }
  const double p = decay - 1.0;
  const double front = std::pow(lower, -p) / p;
  auto g = [&](double v) {
    const double x = lower * std::pow(v, -1.0 / p);
    // The rule samples v arbitrarily close to 0; once x overflows (or the
    // weight underflows) the exact contribution of any integrand with at
    // least the declared decay is a hard zero.
    if (!std::isfinite(x)) return 0.0;
    const double w = f(x) * std::pow(x, decay);
    return std::isfinite(w) ? w : 0.0;
  };
  return front * integrate(g, 0.0, 1.0, rel_tol);
}

}  // namespace netmarket
