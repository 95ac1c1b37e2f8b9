#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "netmarket/errors.hpp"
#include "netmarket/market.hpp"
#include "netmarket/parallel.hpp"
#include "netmarket/powerlaw.hpp"

namespace netmarket {

/// A log-spaced threshold grid on [x0, x_max] x [y0, y_max].
struct GridSpec {
  std::size_t x_points = 200;
  std::size_t y_points = 200;
  double x_max = 0.0;
  double y_max = 0.0;

  /// Default caps: the types where each side's tail mass falls to
  /// `tail_mass`; beyond them a vanishing sliver of the population
  /// remains and both objectives have long since turned down.
  static GridSpec for_market(const Market& m, std::size_t x_points = 200,
                             std::size_t y_points = 200,
                             double tail_mass = 1e-4) {
    auto cap = [&](const PowerLaw& law) {
      // Invert tail_mass(t) = t^(1-e)/(e-1).
      const double e = law.exponent();
      return std::pow((e - 1.0) * tail_mass, 1.0 / (1.0 - e));
    };
    return GridSpec{x_points, y_points, cap(m.consumers()), cap(m.providers())};
  }
};

/// Argmax cell of a grid search, with enough geometry for "within one
/// cell" comparisons.
struct GridResult {
  Thresholds argmax;
  double value;
  double x_cell_ratio;  ///< multiplicative step between adjacent x nodes
  double y_cell_ratio;
  bool expanded;        ///< true if the y range had to grow to contain the optimum
};

namespace detail {

inline std::vector<double> log_nodes(double lo, double hi, std::size_t n) {
  std::vector<double> nodes(n);
  const double span = std::log(hi / lo);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = lo * std::exp(span * static_cast<double>(i) /
                             static_cast<double>(n - 1));
  }
  nodes.front() = lo;
  nodes.back() = hi;
  return nodes;
}

inline void validate(const Market& m, const GridSpec& grid) {
  if (grid.x_points < 2 || grid.y_points < 2) {
    throw invalid_parameter("grid needs at least 2 points per axis");
  }
  if (!(grid.x_max > m.min_consumer_type()) || !(grid.y_max > m.min_provider_type())) {
    throw invalid_parameter("grid maxima must exceed the minimum types");
  }
}

/// Shared scan: evaluates `objective(x_i, y_j)` over the grid (NaN marks
/// an excluded cell), takes the lowest-index argmax, and grows the y range
/// eightfold (up to six times) while the optimum sits in the top two y
/// rows — heavy tails can push interior optima past any fixed cap.
template <typename Objective>
GridResult grid_argmax(const Market& m, GridSpec grid, Objective&& objective) {
  validate(m, grid);
  bool expanded = false;
  for (int round = 0;; ++round) {
    const auto xs = log_nodes(m.min_consumer_type(), grid.x_max, grid.x_points);
    const auto ys = log_nodes(m.min_provider_type(), grid.y_max, grid.y_points);
    std::vector<double> values(xs.size() * ys.size(),
                               -std::numeric_limits<double>::infinity());
    parallel_for(xs.size(), [&](std::size_t i) {
      for (std::size_t j = 0; j < ys.size(); ++j) {
        // A cell that fails numerically (e.g. quadrature trouble at an
        // extreme corner) is excluded rather than aborting the sweep;
        // exceptions must not cross thread boundaries.
        try {
          const double v = objective(xs[i], ys[j]);
          if (!std::isnan(v)) values[i * ys.size() + j] = v;
        } catch (const error&) {
        }
      }
    });
    std::size_t best = values.size();
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (values[k] > best_value) {
        best_value = values[k];
        best = k;
      }
    }
    if (best == values.size()) {
      throw infeasible_prices("grid search: no feasible cell in the grid");
    }
    const std::size_t bi = best / ys.size();
    const std::size_t bj = best % ys.size();
    if (bj + 2 >= ys.size() && round < 6) {
      grid.y_max *= 8.0;
      expanded = true;
      continue;
    }
    return GridResult{Thresholds{xs[bi], ys[bj]}, best_value,
                      std::pow(grid.x_max / m.min_consumer_type(),
                               1.0 / static_cast<double>(grid.x_points - 1)),
                      std::pow(grid.y_max / m.min_provider_type(),
                               1.0 / static_cast<double>(grid.y_points - 1)),
                      expanded};
  }
}

}  // namespace detail

/// Brute-force revenue maximum over thresholds.  Cells whose implied
/// provider fee would be negative are excluded: no nonnegative fee pair
/// realizes them.
inline GridResult grid_revenue(const Market& m, const GridSpec& grid) {
  const double lambda = m.params().lambda;
  const double a = m.params().a;
  return detail::grid_argmax(m, grid, [&](double x, double y) {
    const Thresholds th{x, y};
    const double b = lambda * m.provider_match_scale(th) - a;
    if (b < 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double c = m.value().phi(m.consumer_match_scale(th) * x);
    return c * m.consumers().tail_mass(x) +
           b * m.providers().tail_first_moment(y);
  });
}

/// Brute-force welfare maximum over thresholds.  No feasibility screen:
/// welfare is fee-independent.
inline GridResult grid_welfare(const Market& m, const GridSpec& grid) {
  return detail::grid_argmax(m, grid, [&](double x, double y) {
    return m.welfare(Thresholds{x, y});
  });
}

/// A Monte Carlo estimate with its standard error.
struct McEstimate {
  double estimate;
  double stderr_;
};

/// Importance-sampled check of the tail first moment
/// integral_t^inf x^(1-e) dx, using the type law conditioned above t as
/// the proposal: the estimate is mean(X_i) / ((e-1) t^(e-1)).
///
/// Deterministic for a fixed seed.  The estimator's variance is finite
/// only for e > 3 (the type law's own variance); below that the reported
/// standard error is an in-sample figure, so checks against it should run
/// at frozen seeds.
inline McEstimate mc_integral_check(Exponent e, double t, std::size_t n,
                                    std::uint64_t seed) {
  if (n < 1000) {
    throw invalid_parameter("mc_integral_check needs n >= 1000, got " +
                            std::to_string(n));
  }
  if (!(t > 0.0)) {
    throw invalid_parameter("mc_integral_check needs t > 0, got " +
                            std::to_string(t));
  }
  const double ev = e.value();
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    // Inverse CDF of the conditional law above t (tail exponent e).
    const double x = t * std::pow(1.0 - u, -1.0 / (ev - 1.0));
    sum += x;
    sum_sq += x * x;
  }
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = std::max(0.0, sum_sq / nn - mean * mean);
  const double norm = (ev - 1.0) * std::pow(t, ev - 1.0);
  return McEstimate{mean / norm, std::sqrt(var / nn) / norm};
}

}  // namespace netmarket
