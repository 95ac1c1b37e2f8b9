#pragma once

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "netmarket/errors.hpp"

namespace netmarket {

/// Options for bracketed root refinement.
struct RootOptions {
  double rel_tol = 1e-13;       ///< relative width at which a bracket is accepted
  double abs_tol = 1e-300;      ///< absolute floor for the bracket width
  std::uint64_t max_iter = 200; ///< iteration cap passed to the refiner
};

/// Finds the root of a continuous function on [lo, hi] given f(lo) and
/// f(hi) of opposite (or zero) sign, using TOMS 748 bracketing iterations.
template <typename F>
double solve_bracketed(F&& f, double lo, double hi, double f_lo, double f_hi,
                       const RootOptions& opts = {}) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw bracket_error("solve_bracketed: no sign change on [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "]");
  }
  auto tol = [&](double a, double b) {
    return std::abs(b - a) <= opts.abs_tol + opts.rel_tol * std::abs(b);
  };
  std::uintmax_t iter = opts.max_iter;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iter);
  return 0.5 * (r.first + r.second);
}

/// Finds y >= lo with f(y) = 0 for a function known to be strictly
/// increasing in y, by doubling the upper end until the sign changes and
/// then refining.  Throws bracket_error if no sign change appears after
/// `max_doublings` (the function never reaches zero on the searched range).
template <typename F>
double solve_increasing(F&& f, double lo, int max_doublings = 200,
                        const RootOptions& opts = {}) {
  double f_lo = f(lo);
  if (f_lo == 0.0) return lo;
  if (f_lo > 0.0) {
    throw bracket_error("solve_increasing: function already positive at lower bound " +
                        std::to_string(lo));
  }
  double hi = (lo > 0.0) ? 2.0 * lo : 1.0;
  double f_hi = f(hi);
  int n = 0;
  while (f_hi < 0.0) {
    if (++n > max_doublings) {
      throw bracket_error("solve_increasing: no sign change after " +
                          std::to_string(max_doublings) + " doublings from " +
                          std::to_string(lo));
    }
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = f(hi);
  }
  return solve_bracketed(f, lo, hi, f_lo, f_hi, opts);
}

}  // namespace netmarket
