#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "netmarket/errors.hpp"

namespace netmarket {

/// A tail exponent e > 2 for a pure power-law density t^(-e).
///
/// Exponents at or below 2 give the distribution an infinite first moment,
/// which breaks every aggregate in the model, so they are rejected
/// outright.  Exponents barely above 2 are accepted but flagged: means and
/// tail first moments then involve 1/(e-2) and lose roughly as many digits
/// as e has next to 2.
class Exponent {
 public:
  static constexpr double kMin = 2.0;
  static constexpr double kIllConditionedBand = 1e-6;

  explicit Exponent(double value) : value_(value) {
    if (!(value > kMin)) {
      throw invalid_parameter("tail exponent must exceed 2, got " +
                              std::to_string(value));
    }
  }

  double value() const { return value_; }

  /// True when e - 2 <= 1e-6: results remain defined but carry O(1/(e-2))
  /// amplification of rounding error.
  bool ill_conditioned() const { return value_ - kMin <= kIllConditionedBand; }

 private:
  double value_;
};

/// The power-law type distribution used for both market sides: density
/// p(t) = t^(-e) supported on [t0, inf), where the minimum type
///
///   t0 = (1/(e-1))^(1/(e-1))
///
/// is chosen so the density integrates to one.  All tail integrals used by
/// the model have closed forms, which the oracle suite re-derives by
/// quadrature and Monte Carlo.
class PowerLaw {
 public:
  explicit PowerLaw(Exponent e) : e_(e.value()), min_type_(compute_min_type(e_)) {}
  explicit PowerLaw(double e) : PowerLaw(Exponent(e)) {}

  double exponent() const { return e_; }
  double min_type() const { return min_type_; }

  /// Density t^(-e) for t >= min_type(), zero below.
  double pdf(double t) const {
    return t < min_type_ ? 0.0 : std::pow(t, -e_);
  }

  /// integral_t^inf s^(-e) ds = t^(1-e)/(e-1).  Equals 1 at t = min_type().
  double tail_mass(double t) const {
    require_in_support(t, "tail_mass");
    return std::pow(t, 1.0 - e_) / (e_ - 1.0);
  }

  /// integral_t^inf s * s^(-e) ds = t^(2-e)/(e-2): the mass-weighted type
  /// above t, the quantity the market aggregates on each side.
  double tail_first_moment(double t) const {
    require_in_support(t, "tail_first_moment");
    return std::pow(t, 2.0 - e_) / (e_ - 2.0);
  }

  /// Mean type, i.e. the tail first moment from the minimum type up.
  double mean() const { return tail_first_moment(min_type_); }

  /// Inverse CDF: the type t with P(T <= t) = u.
  double quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) {
      throw invalid_parameter("quantile argument must lie in [0, 1), got " +
                              std::to_string(u));
    }
    return min_type_ * std::pow(1.0 - u, -1.0 / (e_ - 1.0));
  }

  /// Draws one type by inversion from a 53-bit uniform.
  template <typename Rng>
  double sample(Rng& rng) const {
    // Top 53 bits of a 64-bit draw give a uniform on [0, 1) with the full
    // double mantissa; inversion then maps it through the quantile.
    const std::uint64_t bits = static_cast<std::uint64_t>(rng());
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return quantile(u);
  }

 private:
  static double compute_min_type(double e) {
    return std::pow(1.0 / (e - 1.0), 1.0 / (e - 1.0));
  }

  void require_in_support(double t, const char* op) const {
    if (!(t >= min_type_)) {
      throw invalid_parameter(std::string(op) + ": argument " + std::to_string(t) +
                              " below minimum type " + std::to_string(min_type_));
    }
  }

  double e_;
  double min_type_;
};

}  // namespace netmarket
