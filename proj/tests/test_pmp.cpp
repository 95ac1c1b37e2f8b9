#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "netmarket/pmp.hpp"

using netmarket::ChannelSplit;
using netmarket::ChannelTraffics;
using netmarket::MarketParams;
using netmarket::Pmp;
using netmarket::PmpSolution;
using netmarket::Pricing;

namespace {

MarketParams base_params(double lambda = 0.1) {
  return MarketParams::fractional(2.5, 2.5, lambda, 0.0, 0.5);
}

constexpr double kY0 = 0.76314282836888791187;
constexpr double kMean = 2.2894284851066637356;
constexpr double kT0 = 5.2414827884177932143;
constexpr double kC0 = 1.3218021521667294282;

double rel_diff(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

double uniform(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

// Smallest pay-channel capacity share compatible with the speed ordering
// at cutoff y_t: B1 J = (1 - B1) Iy.
double tight_share(const Pmp& pmp, double y_t) {
  const double iy = pmp.market().providers().tail_first_moment(y_t);
  const double j = pmp.free_moment(y_t);
  return iy / (iy + j);
}

}  // namespace

TEST_CASE("the two-channel model only accepts free providers", "[pmp]") {
  CHECK_THROWS_AS(Pmp(MarketParams::fractional(2.5, 2.5, 0.1, 0.05, 0.5)),
                  netmarket::invalid_parameter);
  CHECK_NOTHROW(Pmp(base_params()));
}

TEST_CASE("the speed ordering carves out the feasible splits", "[pmp]") {
  const Pmp pmp(base_params());
  // An empty free channel is only consistent with the whole pipe paid.
  CHECK(pmp.feasible(ChannelSplit{1.0, kY0}));
  CHECK_FALSE(pmp.feasible(ChannelSplit{0.999, kY0}));
  // At beta = 5/2 the cutoff 4 y0 splits the provider moment in half, so
  // the constraint is tight exactly at B1 = 1/2.
  const double y_eq = 4.0 * kY0;
  CHECK(rel_diff(pmp.market().providers().tail_first_moment(y_eq), 0.5 * kMean) <
        1e-14);
  CHECK(pmp.feasible(ChannelSplit{0.5, y_eq}));
  CHECK_FALSE(pmp.feasible(ChannelSplit{0.5 - 1e-9, y_eq}));
  CHECK(pmp.feasible(ChannelSplit{1.0, 10.0 * kY0}));
  // Shares outside [0, 1] and cutoffs below the support are never feasible.
  CHECK_FALSE(pmp.feasible(ChannelSplit{-0.1, y_eq}));
  CHECK_FALSE(pmp.feasible(ChannelSplit{1.1, y_eq}));
  CHECK_FALSE(pmp.feasible(ChannelSplit{0.9, 0.5 * kY0}));
  CHECK_THROWS_AS(pmp.pmp_prices(kY0, ChannelSplit{0.4, y_eq}),
                  netmarket::infeasible_prices);
}

TEST_CASE("an equal split balances the channel traffics and zeroes the fee",
          "[pmp]") {
  const Pmp pmp(base_params());
  const double x0 = pmp.market().min_consumer_type();
  const ChannelSplit split{0.5, 4.0 * kY0};
  const ChannelTraffics t = pmp.channel_traffics(x0, split);
  CHECK(rel_diff(t.t1, 0.5 * kT0) < 1e-13);
  CHECK(rel_diff(t.t2, 0.5 * kT0) < 1e-13);
  // With both channels equally fast the pay channel commands no premium.
  const Pricing prices = pmp.pmp_prices(x0, split);
  CHECK(std::abs(prices.b) < 1e-13);
  CHECK(prices.c > 0.0);
}

TEST_CASE("the one-channel corner reproduces the plain market", "[pmp]") {
  const Pmp pmp(base_params());
  const double x0 = pmp.market().min_consumer_type();
  const ChannelSplit corner{1.0, kY0};
  const ChannelTraffics t = pmp.channel_traffics(x0, corner);
  CHECK(rel_diff(t.t1, kT0) < 1e-13);
  CHECK(t.t2 == 0.0);
  const Pricing prices = pmp.pmp_prices(x0, corner);
  CHECK(rel_diff(prices.b, 0.1 * kMean) < 1e-14);
  CHECK(rel_diff(prices.c, kC0) < 1e-14);
  CHECK(rel_diff(pmp.pmp_revenue(x0, corner), pmp.one_channel_revenue()) < 1e-14);
  CHECK(rel_diff(pmp.one_channel_revenue(), 1.8459504310085087497) < 1e-13);
  // Exact reference at gamma = beta = 3, lambda = 1/100: fees (sqrt(2)/100, 1)
  // and revenue 1 + 2/100.
  const Pmp cubic(MarketParams::fractional(3.0, 3.0, 0.01, 0.0, 0.5));
  CHECK(rel_diff(cubic.one_channel_revenue(), 1.02) < 1e-14);
}

TEST_CASE("the marginal provider is indifferent between the channels", "[pmp]") {
  const Pmp pmp(base_params());
  const double x0 = pmp.market().min_consumer_type();
  std::mt19937_64 rng(90125);
  for (int draw = 0; draw < 12; ++draw) {
    const double y_t = kY0 * std::pow(40.0, uniform(rng));
    const double lo = tight_share(pmp, y_t);
    const double b1 = lo + (1.0 - lo) * (0.001 + 0.998 * uniform(rng));
    const ChannelSplit split{b1, y_t};
    REQUIRE(pmp.feasible(split));
    const ChannelTraffics t = pmp.channel_traffics(x0, split);
    const Pricing prices = pmp.pmp_prices(x0, split);
    const double t0 = pmp.market().base_traffic();
    const double ix = pmp.market().consumers().tail_first_moment(x0);
    const double lambda = pmp.market().params().lambda;
    const double pay = lambda * split.b1 * t0 * ix * y_t / t.t1 - prices.b * y_t;
    const double free_side = lambda * (1.0 - split.b1) * t0 * ix * y_t / t.t2;
    CHECK(rel_diff(pay, free_side) < 1e-10);
  }
}

TEST_CASE("no feasible split beats the one-channel revenue", "[pmp]") {
  const Pmp pmp(base_params());
  const double x0 = pmp.market().min_consumer_type();
  const double bar = pmp.one_channel_revenue();
  std::mt19937_64 rng(55501);
  for (int draw = 0; draw < 200; ++draw) {
    const double y_t = kY0 * std::pow(200.0, uniform(rng));
    const double lo = tight_share(pmp, y_t);
    const double b1 = lo + (1.0 - lo) * uniform(rng);
    const ChannelSplit split{b1, y_t};
    if (!pmp.feasible(split)) continue;  // rounding at the tight edge
    CHECK(pmp.pmp_revenue(x0, split) <= bar + 1e-12 * bar);
  }
}

TEST_CASE("the two-channel optimum collapses to the one-channel corner",
          "[pmp]") {
  for (double lambda : {0.1, 0.01}) {
    const Pmp pmp(base_params(lambda));
    const PmpSolution sol = pmp.solve_pmp();
    CHECK(sol.degenerate);
    CHECK(sol.split.b1 == 1.0);
    CHECK(sol.split.y_t == pmp.market().min_provider_type());
    CHECK(rel_diff(sol.revenue, pmp.one_channel_revenue()) < 1e-12);
    CHECK(rel_diff(sol.pricing.b, lambda * kMean) < 1e-13);
  }
  CHECK_THROWS_AS(Pmp(base_params()).solve_pmp(1, 200),
                  netmarket::invalid_parameter);
}

TEST_CASE("two-channel revenue never gains from excluding consumers", "[pmp]") {
  const Pmp pmp(base_params());
  std::mt19937_64 rng(61406);
  CHECK(pmp.verify_x0(ChannelSplit{1.0, kY0}));
  CHECK(pmp.verify_x0(ChannelSplit{0.5, 4.0 * kY0}));
  for (int draw = 0; draw < 5; ++draw) {
    const double y_t = kY0 * std::pow(30.0, uniform(rng));
    const double lo = tight_share(pmp, y_t);
    const ChannelSplit split{lo + (1.0 - lo) * (0.01 + 0.98 * uniform(rng)), y_t};
    REQUIRE(pmp.feasible(split));
    CHECK(pmp.verify_x0(split));
  }
  CHECK_THROWS_AS(pmp.verify_x0(ChannelSplit{1.0, kY0}, 1),
                  netmarket::invalid_parameter);
}

TEST_CASE("thresholds outside the supports are rejected", "[pmp]") {
  const Pmp pmp(base_params());
  CHECK_THROWS_AS(pmp.channel_traffics(0.5 * kY0, ChannelSplit{1.0, kY0}),
                  netmarket::invalid_parameter);
  CHECK_THROWS_AS(pmp.channel_traffics(kY0, ChannelSplit{1.0, 0.5 * kY0}),
                  netmarket::invalid_parameter);
  CHECK_THROWS_AS(pmp.channel_traffics(kY0, ChannelSplit{1.5, kY0}),
                  netmarket::invalid_parameter);
  CHECK_THROWS_AS(pmp.pmp_revenue(kY0, ChannelSplit{-0.2, 2.0 * kY0}),
                  netmarket::invalid_parameter);
}
