#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "netmarket/errors.hpp"
#include "netmarket/market.hpp"
#include "netmarket/oracle.hpp"
#include "netmarket/parallel.hpp"

namespace netmarket {

/// A two-channel configuration: the pay channel gets capacity share B1
/// and the providers of type >= y_t; everyone else rides the free channel.
struct ChannelSplit {
  double b1;
  double y_t;
};

/// Channel traffics (pay, free).
struct ChannelTraffics {
  double t1;
  double t2;
};

/// Result of the two-channel revenue optimization.
struct PmpSolution {
  ChannelSplit split;
  Pricing pricing;
  double revenue;
  bool degenerate;  ///< optimum collapsed to the one-channel corner (y0, B1=1)
};

/// The two-channel market: the ISP splits its pipe into a paid fast
/// channel and a free slow one, providers self-select, and consumers see
/// content from both channels at each channel's speed.
///
/// Provider costs are fixed at zero here: with a = 0 no provider ever
/// exits, so y_t only partitions providers between channels.
class Pmp {
 public:
  explicit Pmp(MarketParams params) : market_(std::move(params)) {
    if (market_.params().a != 0.0) {
      throw invalid_parameter(
          "two-channel model requires zero provider cost (a = 0), got a = " +
          std::to_string(market_.params().a));
    }
  }

  const Market& market() const { return market_; }

  /// Free-channel provider mass-weighted type: integral_{y0}^{y_t} y^(1-beta) dy.
  double free_moment(double y_t) const {
    return market_.providers().mean() -
           market_.providers().tail_first_moment(y_t);
  }

  /// Speed-ordering feasibility: the pay channel must be at least as fast,
  /// i.e. B1 * J >= (1 - B1) * Iy.  With an empty free channel (y_t = y0)
  /// only B1 = 1 qualifies.
  bool feasible(const ChannelSplit& split) const {
    if (!(split.b1 >= 0.0 && split.b1 <= 1.0)) return false;
    if (!(split.y_t >= market_.min_provider_type())) return false;
    const double iy = market_.providers().tail_first_moment(split.y_t);
    const double j = free_moment(split.y_t);
    if (j <= 0.0) return split.b1 == 1.0;
    return split.b1 * j >= (1.0 - split.b1) * iy;
  }

  /// Self-consistent channel traffics:
  /// T1 = sqrt(B1 T0 Ix Iy), T2 = sqrt((1-B1) T0 Ix J).
  ChannelTraffics channel_traffics(double x_t, const ChannelSplit& split) const {
    check(x_t, split);
    const double t0 = market_.base_traffic();
    const double ix = market_.consumers().tail_first_moment(x_t);
    const double iy = market_.providers().tail_first_moment(split.y_t);
    const double j = std::max(0.0, free_moment(split.y_t));
    return ChannelTraffics{std::sqrt(split.b1 * t0 * ix * iy),
                           std::sqrt((1.0 - split.b1) * t0 * ix * j)};
  }

  /// Threshold fee pair for the split: consumers pay up to the marginal
  /// type's value of content from both channels, the marginal provider is
  /// indifferent between paying b for the fast channel and riding free:
  ///
  ///   c = phi( sqrt(T0/Ix) (sqrt(B1 Iy) + sqrt((1-B1) J)) x_t )
  ///   b = lambda sqrt(T0 Ix) (sqrt(B1/Iy) - sqrt((1-B1)/J))
  ///
  /// with the free-channel terms dropped when that channel is empty.
  Pricing pmp_prices(double x_t, const ChannelSplit& split) const {
    check(x_t, split);
    if (!feasible(split)) {
      throw infeasible_prices(
          "channel split violates the speed ordering (free channel faster); "
          "B1 = " + std::to_string(split.b1) + ", y_t = " + std::to_string(split.y_t));
    }
    const double t0 = market_.base_traffic();
    const double ix = market_.consumers().tail_first_moment(x_t);
    const double iy = market_.providers().tail_first_moment(split.y_t);
    const double j = std::max(0.0, free_moment(split.y_t));
    const double lambda = market_.params().lambda;

    double reach = std::sqrt(split.b1 * iy);
    double fee_gap = std::sqrt(split.b1 / iy);
    if (j > 0.0) {
      reach += std::sqrt((1.0 - split.b1) * j);
      fee_gap -= std::sqrt((1.0 - split.b1) / j);
    }
    const double c = market_.value().phi(std::sqrt(t0 / ix) * reach * x_t);
    double b = lambda * std::sqrt(t0 * ix) * fee_gap;
    // Feasibility makes b >= 0 analytically; only rounding can dip below.
    if (b < 0.0) {
      if (b < -1e-12) {
        throw infeasible_prices("negative pay-channel fee on a feasible split (b = " +
                                std::to_string(b) + ")");
      }
      b = 0.0;
    }
    return Pricing{b, c};
  }

  /// Two-channel revenue R = c * (consumer mass) + b * Iy.
  double pmp_revenue(double x_t, const ChannelSplit& split) const {
    const Pricing prices = pmp_prices(x_t, split);
    return prices.c * market_.consumers().tail_mass(x_t) +
           prices.b * market_.providers().tail_first_moment(split.y_t);
  }

  /// Revenue of the plain one-channel market at a = 0 (the degenerate
  /// corner of the two-channel problem).
  double one_channel_revenue() const {
    return market_.revenue(Thresholds{market_.min_consumer_type(),
                                      market_.min_provider_type()});
  }

  /// Maximizes two-channel revenue over (y_t, B1) with the consumer cutoff
  /// at x0: a coarse grid (y log-spaced, B1 linear) followed by three
  /// 10x zoom refinements around the incumbent, all feasibility-filtered.
  /// The solution is flagged degenerate when it lies within a final-grid
  /// cell of the one-channel corner (y0, 1).
  PmpSolution solve_pmp(std::size_t y_points = 200, std::size_t b_points = 200) const {
    if (y_points < 2 || b_points < 2) {
      throw invalid_parameter("solve_pmp needs at least 2 grid points per axis");
    }
    const double y0 = market_.min_provider_type();
    const double x0 = market_.min_consumer_type();
    const double beta = market_.params().beta;
    // Same tail cap as the one-channel oracle grids.
    const double y_cap = std::pow((beta - 1.0) * 1e-4, 1.0 / (1.0 - beta));

    double y_lo = y0, y_hi = y_cap, b_lo = 0.0, b_hi = 1.0;
    ChannelSplit best{1.0, y0};
    double best_value = -std::numeric_limits<double>::infinity();
    double y_step = 0.0, b_step = 0.0;

    for (int round = 0; round < 4; ++round) {
      const std::size_t ny = y_points, nb = b_points;
      std::vector<double> ys(ny), bs(nb);
      const double span = std::log(y_hi / y_lo);
      for (std::size_t j = 0; j < ny; ++j) {
        ys[j] = y_lo * std::exp(span * static_cast<double>(j) /
                                static_cast<double>(ny - 1));
      }
      ys.front() = y_lo;
      ys.back() = y_hi;
      for (std::size_t k = 0; k < nb; ++k) {
        bs[k] = b_lo + (b_hi - b_lo) * static_cast<double>(k) /
                           static_cast<double>(nb - 1);
      }
      bs.back() = b_hi;

      std::vector<double> values(ny * nb,
                                 -std::numeric_limits<double>::infinity());
      parallel_for(ny, [&](std::size_t j) {
        for (std::size_t k = 0; k < nb; ++k) {
          const ChannelSplit split{bs[k], ys[j]};
          if (!feasible(split)) continue;
          values[j * nb + k] = pmp_revenue(x0, split);
        }
      });
      std::size_t arg = 0;
      double val = -std::numeric_limits<double>::infinity();
      for (std::size_t idx = 0; idx < values.size(); ++idx) {
        if (values[idx] > val) {
          val = values[idx];
          arg = idx;
        }
      }
      const std::size_t ja = arg / nb, ka = arg % nb;
      if (val > best_value) {
        best_value = val;
        best = ChannelSplit{bs[ka], ys[ja]};
      }
      y_step = span / static_cast<double>(ny - 1);
      b_step = (b_hi - b_lo) / static_cast<double>(nb - 1);

      // Zoom: a 10x narrower window centered on the incumbent, clamped to
      // the original domain.
      const double y_half = span / 20.0;
      const double log_best = std::log(best.y_t);
      y_lo = std::max(y0, std::exp(log_best - y_half));
      y_hi = std::min(y_cap, std::exp(log_best + y_half));
      if (!(y_hi > y_lo)) y_hi = y_lo * (1.0 + 1e-12);
      const double b_half = (b_hi - b_lo) / 20.0;
      b_lo = std::max(0.0, best.b1 - b_half);
      b_hi = std::min(1.0, best.b1 + b_half);
      if (!(b_hi > b_lo)) b_lo = std::max(0.0, b_hi - 1e-12);
    }

    const bool degenerate =
        std::log(best.y_t / y0) <= y_step + 1e-12 && 1.0 - best.b1 <= b_step + 1e-12;
    return PmpSolution{best, pmp_prices(x0, best), best_value, degenerate};
  }

  /// Confirms the consumer-cutoff optimality: two-channel revenue is
  /// non-increasing in x_t (within 1e-10) along a log grid from x0 to the
  /// consumer tail cap, for the given split.
  bool verify_x0(const ChannelSplit& split, std::size_t x_points = 50) const {
    if (x_points < 2) {
      throw invalid_parameter("verify_x0 needs at least 2 grid points");
    }
    const double x0 = market_.min_consumer_type();
    const double gamma = market_.params().gamma;
    const double x_cap = std::pow((gamma - 1.0) * 1e-4, 1.0 / (1.0 - gamma));
    double prev = pmp_revenue(x0, split);
    for (std::size_t i = 1; i < x_points; ++i) {
      const double x = x0 * std::exp(std::log(x_cap / x0) *
                                     static_cast<double>(i) /
                                     static_cast<double>(x_points - 1));
      const double r = pmp_revenue(x, split);
      if (r > prev + 1e-10) return false;
      prev = r;
    }
    return true;
  }

 private:
  void check(double x_t, const ChannelSplit& split) const {
    if (!(x_t >= market_.min_consumer_type())) {
      throw invalid_parameter("consumer threshold " + std::to_string(x_t) +
                              " below minimum type " +
                              std::to_string(market_.min_consumer_type()));
    }
    if (!(split.y_t >= market_.min_provider_type())) {
      throw invalid_parameter("pay-channel cutoff " + std::to_string(split.y_t) +
                              " below minimum type " +
                              std::to_string(market_.min_provider_type()));
    }
    if (!(split.b1 >= 0.0 && split.b1 <= 1.0)) {
      throw invalid_parameter("capacity share B1 must lie in [0, 1], got " +
                              std::to_string(split.b1));
    }
  }

  Market market_;
};

}  // namespace netmarket
